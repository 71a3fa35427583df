#pragma once

#include <vector>

#include "l2tri/core.hpp"
#include "l2tri/derivatives.hpp"

namespace l2tri {

struct PseudoInverse {
  MatX matrix;  ///< 3 x 2n
  Eigen::Index rank = 0;
  bool rank_deficient() const noexcept { return rank < 3; }
};

/// Moore-Penrose pseudo-inverse of a 2n x 3 Jacobian through a complete
/// orthogonal decomposition; a rank < 3 input yields the rank-r inverse.
PseudoInverse pseudo_inverse_jacobian(const MatX& j);

/// K = -(J^+)^T (sum phi_i Hessian(phi_i)) J^+, a symmetric 2n x 2n matrix.
/// Needs second-order caches.
MatX curvature_matrix(const TriangulationProblem& problem,
                      const std::vector<CameraDerivativeCache>& caches, const ScenePoint& point);

struct Solvability {
  double rho_squared = 0.0;    ///< 1 / lambda_max(K)^2, +inf for zero curvature
  double gamma_squared = 0.0;  ///< f(point)
  bool solvable = false;       ///< rho_squared >= gamma_squared
  /// rho_squared / gamma_squared, for callers wanting a stricter margin.
  double margin() const noexcept { return rho_squared / gamma_squared; }
};

/// Intrinsic-curvature solvability test at a point. lambda_max is the
/// eigenvalue of K of largest magnitude.
Solvability solvability_check(const TriangulationProblem& problem,
                              const std::vector<CameraDerivativeCache>& caches, const ScenePoint& point);

struct KantorovichResult {
  double distance = 0.0;
  /// Hessian was singular; the distance came from a pseudo-inverse solve.
  bool singular = false;
};

/// ||H^{-1} g||_2 at the point. Needs second-order caches.
KantorovichResult kantorovich_distance(const TriangulationProblem& problem,
                                       const std::vector<CameraDerivativeCache>& caches,
                                       const ScenePoint& point);

/// ||H^{-1} g||_2 for an already assembled gradient and Hessian.
KantorovichResult kantorovich_distance(const Vec3& g, const Mat3& h);

/// Numerical L2 optimality: a numerically stationary point (K_LC <= 1.49e-8)
/// whose cost does not exceed the reference (symmedian-point) cost.
bool optimality_verdict(double kantorovich, double cost, double reference_cost);

struct OptimalityReport {
  double rho_squared = 0.0;
  double gamma_squared = 0.0;
  double kantorovich_distance = 0.0;
  bool solvable_by_curvature = false;
  bool numerically_l2_optimal = false;
  double suboptimal_reference_cost = 0.0;
};

/// Full diagnostic at a solution, using `reference_cost` as the suboptimal
/// comparison cost.
OptimalityReport verify(const TriangulationProblem& problem, const ScenePoint& solution,
                        double reference_cost);

}  // namespace l2tri
