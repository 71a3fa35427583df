#include "l2tri/derivatives.hpp"

#include <stdexcept>

namespace l2tri {
namespace {

int determinant_slot(int l, int m, int n) {
  // nine (m, n) pairs per image row, n skipping m
  const int col = n < m ? n - 1 : n - 2;
  return (l - 1) * 9 + (m - 1) * 3 + col;
}

constexpr std::array<std::array<int, 2>, 6> kHessianPairs{{{1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

}  // namespace

CameraDerivativeCache::CameraDerivativeCache(const CameraMatrix& camera, DerivativeOrder order) {
  const Mat34& p = camera.matrix();
  depth_row_ = p.row(2).transpose();

  for (int l = 1; l <= 2; ++l) {
    for (int m = 1; m <= 3; ++m) {
      for (int n = 1; n <= 4; ++n) {
        if (n == m) continue;
        determinants_[determinant_slot(l, m, n)] =
            p(l - 1, m - 1) * p(2, n - 1) - p(l - 1, n - 1) * p(2, m - 1);
      }
    }
  }

  j_num_.setZero();
  for (int l = 1; l <= 2; ++l)
    for (int m = 1; m <= 3; ++m)
      for (int n = 1; n <= 4; ++n) j_num_(l - 1, 4 * (m - 1) + (n - 1)) = determinant(l, m, n);

  if (order == DerivativeOrder::second) {
    HessianNumeric h;
    for (int l = 1; l <= 2; ++l) {
      for (int pair = 0; pair < 6; ++pair) {
        const int m = kHessianPairs[pair][0];
        const int k = kHessianPairs[pair][1];
        for (int j = 1; j <= 4; ++j) {
          h(6 * (l - 1) + pair, j - 1) = determinant(l, m, k) * depth_row_[j - 1] -
                                         2.0 * depth_row_[k - 1] * determinant(l, m, j);
        }
      }
    }
    h_num_ = h;
  }
}

double CameraDerivativeCache::determinant(int l, int m, int n) const {
  if (l < 1 || l > 2 || m < 1 || m > 3 || n < 1 || n > 4)
    throw std::out_of_range("determinant index out of range");
  if (m == n) return 0.0;
  return determinants_[determinant_slot(l, m, n)];
}

const HessianNumeric& CameraDerivativeCache::h_num() const {
  if (!h_num_) throw std::logic_error("second-order cache was not built for this camera");
  return *h_num_;
}

JacobianBlock CameraDerivativeCache::jacobian_block(const Vec4& xh, double depth) const {
  const double inv2 = 1.0 / (depth * depth);
  JacobianBlock block;
  for (int r = 0; r < 2; ++r)
    for (int m = 0; m < 3; ++m) block(r, m) = j_num_.row(r).segment<4>(4 * m).dot(xh) * inv2;
  return block;
}

std::array<Mat3, 2> CameraDerivativeCache::second_derivatives(const Vec4& xh, double depth) const {
  const Eigen::Matrix<double, 12, 1> h12 = h_num() * xh / (depth * depth * depth);
  std::array<Mat3, 2> out;
  for (int l = 0; l < 2; ++l) {
    Mat3& s = out[l];
    for (int pair = 0; pair < 6; ++pair) {
      const int m = kHessianPairs[pair][0] - 1;
      const int k = kHessianPairs[pair][1] - 1;
      s(m, k) = s(k, m) = h12[6 * l + pair];
    }
  }
  return out;
}

std::vector<CameraDerivativeCache> build_caches(const TriangulationProblem& problem,
                                                DerivativeOrder order) {
  std::vector<CameraDerivativeCache> caches;
  caches.reserve(problem.size());
  for (const auto& camera : problem.cameras()) caches.emplace_back(camera, order);
  return caches;
}

KronLift kron_lift(const ScenePoint& point) {
  KronLift k = KronLift::Zero();
  const Vec4 xh = homogeneous(point);
  for (int b = 0; b < 3; ++b) k.block<4, 1>(4 * b, b) = xh;
  return k;
}

namespace {

double checked_depth(const CameraDerivativeCache& cache, const Vec4& xh, std::size_t i) {
  const double depth = cache.depth_row().dot(xh);
  if (!(std::abs(depth) > kDepthEpsilon)) throw DepthNearZero(i);
  return depth;
}

}  // namespace

MatX jacobian(const TriangulationProblem& problem, const std::vector<CameraDerivativeCache>& caches,
              const ScenePoint& point) {
  const Vec4 xh = homogeneous(point);
  MatX j(2 * problem.size(), 3);
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const double depth = checked_depth(caches[i], xh, i);
    j.block<2, 3>(2 * static_cast<Eigen::Index>(i), 0) = caches[i].jacobian_block(xh, depth);
  }
  return j;
}

Vec3 gradient(const TriangulationProblem& problem, const std::vector<CameraDerivativeCache>& caches,
              const ScenePoint& point, const ResidualEvaluation& residual) {
  return jacobian(problem, caches, point).transpose() * residual.residuals;
}

Mat3 second_order_term(const TriangulationProblem& problem,
                       const std::vector<CameraDerivativeCache>& caches, const ScenePoint& point,
                       const ResidualEvaluation& residual) {
  const Vec4 xh = homogeneous(point);
  Mat3 s = Mat3::Zero();
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const double depth = checked_depth(caches[i], xh, i);
    const auto second = caches[i].second_derivatives(xh, depth);
    const auto k = 2 * static_cast<Eigen::Index>(i);
    s += residual.residuals[k] * second[0] + residual.residuals[k + 1] * second[1];
  }
  return s;
}

Mat3 hessian(const TriangulationProblem& problem, const std::vector<CameraDerivativeCache>& caches,
             const ScenePoint& point, const ResidualEvaluation& residual) {
  const MatX j = jacobian(problem, caches, point);
  Mat3 h = j.transpose() * j;
  h = 0.5 * (h + h.transpose()).eval();
  h += second_order_term(problem, caches, point, residual);
  return h;
}

DerivativeBundle evaluate_derivatives(const TriangulationProblem& problem,
                                      const std::vector<CameraDerivativeCache>& caches,
                                      const ScenePoint& point, const ResidualEvaluation& residual,
                                      bool with_hessian) {
  DerivativeBundle out;
  out.jacobian = jacobian(problem, caches, point);
  out.gradient = out.jacobian.transpose() * residual.residuals;
  out.gauss_newton_matrix = out.jacobian.transpose() * out.jacobian;
  out.gauss_newton_matrix = 0.5 * (out.gauss_newton_matrix + out.gauss_newton_matrix.transpose()).eval();
  if (with_hessian)
    out.hessian = out.gauss_newton_matrix + second_order_term(problem, caches, point, residual);
  return out;
}

}  // namespace l2tri
