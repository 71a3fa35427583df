#pragma once

#include <array>
#include <optional>
#include <vector>

#include "l2tri/core.hpp"

namespace l2tri {

using JacobianNumeric = Eigen::Matrix<double, 2, 12>;
using HessianNumeric = Eigen::Matrix<double, 12, 4>;
using KronLift = Eigen::Matrix<double, 12, 3>;
using JacobianBlock = Eigen::Matrix<double, 2, 3>;

/// Which derivative caches to precompute for a camera.
enum class DerivativeOrder { first, second };

/// Camera-only quantities from which exact derivatives of one camera's
/// residual pair are assembled.
///
/// With a = image row l (l = 1, 2) and c = depth row of P, the determinants are
///   delta(l, m, n) = a_m c_n - a_n c_m,   m in 1..3, n in 1..4, m != n,
/// eighteen values in total. The Jacobian numeric part is the 2x12 matrix whose
/// row l is (delta(l,1,1..4), delta(l,2,1..4), delta(l,3,1..4)) with zero
/// diagonal terms, so that  J_i = j_num * kron_lift(X) / depth^2.
///
/// The Hessian numeric part stores, for each residual, the six independent
/// entries of its 3x3 second-derivative matrix in the order
/// (11, 12, 13, 22, 23, 33) as linear forms in (x, y, z, 1):
///   d2 phi / dx_m dx_k = sum_j (delta(m,k) c_j - 2 c_k delta(m,j)) X_j / depth^3.
class CameraDerivativeCache {
 public:
  explicit CameraDerivativeCache(const CameraMatrix& camera,
                                 DerivativeOrder order = DerivativeOrder::first);

  /// One-based indices, matching the usual p_{lm} notation. delta(l, m, m) is 0.
  double determinant(int l, int m, int n) const;

  const JacobianNumeric& j_num() const noexcept { return j_num_; }
  bool has_second_order() const noexcept { return h_num_.has_value(); }
  /// Throws std::logic_error when the cache was built first-order only.
  const HessianNumeric& h_num() const;

  const Vec4& depth_row() const noexcept { return depth_row_; }

  /// Row pair of the Jacobian for this camera at xh with the given depth.
  JacobianBlock jacobian_block(const Vec4& xh, double depth) const;

  /// Second-derivative matrices of the u and v residuals at xh.
  std::array<Mat3, 2> second_derivatives(const Vec4& xh, double depth) const;

 private:
  std::array<double, 18> determinants_{};
  JacobianNumeric j_num_;
  std::optional<HessianNumeric> h_num_;
  Vec4 depth_row_;
};

std::vector<CameraDerivativeCache> build_caches(const TriangulationProblem& problem,
                                                DerivativeOrder order = DerivativeOrder::first);

/// I_3 (x) (x, y, z, 1)^T, a 12x3 block-diagonal matrix.
KronLift kron_lift(const ScenePoint& point);

/// 2n x 3 Jacobian of the residual vector. Throws DepthNearZero.
MatX jacobian(const TriangulationProblem& problem, const std::vector<CameraDerivativeCache>& caches,
              const ScenePoint& point);

/// g = J^T r, the gradient of half the cost.
Vec3 gradient(const TriangulationProblem& problem, const std::vector<CameraDerivativeCache>& caches,
              const ScenePoint& point, const ResidualEvaluation& residual);

/// sum_i phi_i * Hessian(phi_i). Requires second-order caches.
Mat3 second_order_term(const TriangulationProblem& problem,
                       const std::vector<CameraDerivativeCache>& caches, const ScenePoint& point,
                       const ResidualEvaluation& residual);

/// H = J^T J + sum_i phi_i Hessian(phi_i), the Hessian of half the cost.
Mat3 hessian(const TriangulationProblem& problem, const std::vector<CameraDerivativeCache>& caches,
             const ScenePoint& point, const ResidualEvaluation& residual);

struct DerivativeBundle {
  MatX jacobian;
  Vec3 gradient = Vec3::Zero();
  Mat3 gauss_newton_matrix = Mat3::Zero();
  std::optional<Mat3> hessian;
};

/// Evaluates J, g and J^T J at once; the full Hessian only when requested.
DerivativeBundle evaluate_derivatives(const TriangulationProblem& problem,
                                      const std::vector<CameraDerivativeCache>& caches,
                                      const ScenePoint& point, const ResidualEvaluation& residual,
                                      bool with_hessian = false);

}  // namespace l2tri
