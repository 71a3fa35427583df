#include "l2tri/initializer.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace l2tri {

Ray factor_camera(const CameraMatrix& camera, const ImageObservation& obs) {
  const Mat3 m = camera.left_block();
  const double scale = m.norm();
  const Eigen::FullPivLU<Mat3> lu(m);
  if (!(std::abs(lu.determinant()) > 1e-14 * scale * scale * scale))
    throw SingularCamera("camera '" + camera.label() + "' has a near-singular left 3x3 block");

  Ray ray;
  ray.anchor = -lu.solve(camera.last_column());
  ray.direction = lu.solve(Vec3(obs.u, obs.v, 1.0)).normalized();
  const double depth = camera.matrix().row(2).dot(homogeneous(ray.anchor + ray.direction));
  if (depth < 0.0) ray.direction = -ray.direction;
  return ray;
}

Mat3 ray_projection(const Ray& ray) {
  return Mat3::Identity() - ray.direction * ray.direction.transpose();
}

ScenePoint symmedian_point(std::span<const Ray> rays) {
  if (rays.size() < 2) throw ParallelRays("symmedian point needs at least two rays");
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (const Ray& ray : rays) {
    const Mat3 p = ray_projection(ray);
    a += p;
    b += p * ray.anchor;
  }

  const Eigen::SelfAdjointEigenSolver<Mat3> eig(a, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()[0];
  const double hi = eig.eigenvalues()[2];
  if (!(lo > 0.0) || hi / lo > kParallelRayCondition)
    throw ParallelRays("viewing rays are parallel; symmedian system is singular");

  const Eigen::LDLT<Mat3> ldlt(a);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const Vec3 x = ldlt.solve(b);
    if (x.allFinite()) return x;
  }
  return Eigen::FullPivLU<Mat3>(a).solve(b);
}

std::vector<Ray> back_project(const TriangulationProblem& problem) {
  std::vector<Ray> rays;
  rays.reserve(problem.size());
  for (std::size_t i = 0; i < problem.size(); ++i)
    rays.push_back(factor_camera(problem.camera(i), problem.observation(i)));
  return rays;
}

Initialization initialize(const TriangulationProblem& problem) {
  const std::vector<Ray> rays = back_project(problem);
  try {
    return {symmedian_point(rays), false};
  } catch (const ParallelRays&) {
  }

  double best = std::numeric_limits<double>::infinity();
  ScenePoint mid = rays.front().anchor;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    for (std::size_t j = i + 1; j < rays.size(); ++j) {
      const double d = (rays[i].anchor - rays[j].anchor).squaredNorm();
      if (d < best) {
        best = d;
        mid = 0.5 * (rays[i].anchor + rays[j].anchor);
      }
    }
  }
  return {mid, true};
}

}  // namespace l2tri
