#include "l2tri/core.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/LU>

namespace l2tri {

DepthNearZero::DepthNearZero(std::size_t camera_index)
    : Error("projective depth near zero for camera " + std::to_string(camera_index)),
      camera_index_(camera_index) {}

CameraMatrix::CameraMatrix(const Mat34& p, std::string label) : p_(p), label_(std::move(label)) {
  if (!p_.allFinite()) throw InvalidCamera("camera '" + label_ + "' has non-finite entries");
  if (p_.leftCols<3>().determinant() == 0.0)
    throw InvalidCamera("camera '" + label_ + "' has a singular left 3x3 block");
}

CameraMatrix CameraMatrix::scaled(double s) const { return CameraMatrix(s * p_, label_); }

TriangulationProblem::TriangulationProblem(std::vector<CameraMatrix> cameras,
                                           std::vector<ImageObservation> observations)
    : cameras_(std::move(cameras)), observations_(std::move(observations)) {
  if (cameras_.size() != observations_.size())
    throw InvalidProblem("camera and observation counts differ");
  if (cameras_.size() < 2) throw InvalidProblem("triangulation requires at least two views");
  for (const auto& obs : observations_) {
    if (!std::isfinite(obs.u) || !std::isfinite(obs.v))
      throw InvalidProblem("non-finite image observation");
  }
}

Projection project(const CameraMatrix& camera, const ScenePoint& point) {
  const Vec3 h = camera.matrix() * homogeneous(point);
  if (std::abs(h.z()) <= kDepthEpsilon) throw DepthNearZero(0);
  return {h.x() / h.z(), h.y() / h.z(), h.z()};
}

namespace {

// Extended-precision row dot product with the homogeneous point.
long double dot_row(const Mat34& p, int row, const ScenePoint& x) {
  return static_cast<long double>(p(row, 0)) * x.x() + static_cast<long double>(p(row, 1)) * x.y() +
         static_cast<long double>(p(row, 2)) * x.z() + static_cast<long double>(p(row, 3));
}

}  // namespace

bool try_evaluate_residual(const TriangulationProblem& problem, const ScenePoint& point,
                           ResidualEvaluation& out) {
  // Residuals and cost are accumulated in extended precision and rounded
  // once, so cost comparisons between nearby points stay meaningful close to
  // a minimum.
  const std::size_t n = problem.size();
  out.residuals.resize(2 * static_cast<Eigen::Index>(n));
  out.depths.resize(static_cast<Eigen::Index>(n));
  long double cost = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat34& p = problem.camera(i).matrix();
    const long double depth = dot_row(p, 2, point);
    if (!(std::abs(depth) > kDepthEpsilon)) return false;
    const auto k = static_cast<Eigen::Index>(i);
    const long double ru = dot_row(p, 0, point) / depth - problem.observation(i).u;
    const long double rv = dot_row(p, 1, point) / depth - problem.observation(i).v;
    out.residuals[2 * k] = static_cast<double>(ru);
    out.residuals[2 * k + 1] = static_cast<double>(rv);
    out.depths[k] = static_cast<double>(depth);
    cost += ru * ru + rv * rv;
  }
  out.cost = static_cast<double>(cost);
  return true;
}

ResidualEvaluation evaluate_residual(const TriangulationProblem& problem, const ScenePoint& point) {
  ResidualEvaluation ev;
  if (!try_evaluate_residual(problem, point, ev)) {
    for (std::size_t i = 0; i < problem.size(); ++i) {
      if (!(std::abs(dot_row(problem.camera(i).matrix(), 2, point)) > kDepthEpsilon)) throw DepthNearZero(i);
    }
  }
  return ev;
}

double cost_or_infinity(const TriangulationProblem& problem, const ScenePoint& point) {
  ResidualEvaluation ev;
  if (!point.allFinite() || !try_evaluate_residual(problem, point, ev))
    return std::numeric_limits<double>::infinity();
  return ev.cost;
}

}  // namespace l2tri
