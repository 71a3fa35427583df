#include "l2tri/verification.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "l2tri/solver.hpp"

namespace l2tri {

PseudoInverse pseudo_inverse_jacobian(const MatX& j) {
  const Eigen::CompleteOrthogonalDecomposition<MatX> cod(j);
  return {cod.pseudoInverse(), cod.rank()};
}

MatX curvature_matrix(const TriangulationProblem& problem,
                      const std::vector<CameraDerivativeCache>& caches, const ScenePoint& point) {
  const ResidualEvaluation ev = evaluate_residual(problem, point);
  const MatX pinv = pseudo_inverse_jacobian(jacobian(problem, caches, point)).matrix;
  const Mat3 s = second_order_term(problem, caches, point, ev);
  MatX k = -(pinv.transpose() * s * pinv);
  return 0.5 * (k + k.transpose());
}

Solvability solvability_check(const TriangulationProblem& problem,
                              const std::vector<CameraDerivativeCache>& caches, const ScenePoint& point) {
  Solvability out;
  out.gamma_squared = evaluate_residual(problem, point).cost;
  const MatX k = curvature_matrix(problem, caches, point);
  const Eigen::SelfAdjointEigenSolver<MatX> eig(k, Eigen::EigenvaluesOnly);
  const double lambda_max = eig.eigenvalues().cwiseAbs().maxCoeff();
  out.rho_squared = lambda_max > 0.0 ? 1.0 / (lambda_max * lambda_max)
                                     : std::numeric_limits<double>::infinity();
  out.solvable = out.rho_squared >= out.gamma_squared;
  return out;
}

KantorovichResult kantorovich_distance(const Vec3& g, const Mat3& h) {
  // Same factorization as newton_step so both report the same step.
  const Eigen::LLT<Mat3> llt(h);
  if (llt.info() == Eigen::Success) {
    const Vec3 d = llt.solve(g);
    if (d.allFinite()) return {d.norm(), false};
  }
  const Eigen::FullPivLU<Mat3> lu(h);
  if (lu.isInvertible()) return {lu.solve(g).norm(), false};
  const Eigen::CompleteOrthogonalDecomposition<Mat3> cod(h);
  return {cod.solve(g).norm(), true};
}

KantorovichResult kantorovich_distance(const TriangulationProblem& problem,
                                       const std::vector<CameraDerivativeCache>& caches,
                                       const ScenePoint& point) {
  const ResidualEvaluation ev = evaluate_residual(problem, point);
  const DerivativeBundle d = evaluate_derivatives(problem, caches, point, ev, true);
  return kantorovich_distance(d.gradient, *d.hessian);
}

bool optimality_verdict(double kantorovich, double cost, double reference_cost) {
  return kantorovich <= kStationarityThreshold && cost <= reference_cost;
}

OptimalityReport verify(const TriangulationProblem& problem, const ScenePoint& solution,
                        double reference_cost) {
  const auto caches = build_caches(problem, DerivativeOrder::second);
  OptimalityReport out;
  const ResidualEvaluation ev = evaluate_residual(problem, solution);
  const DerivativeBundle d = evaluate_derivatives(problem, caches, solution, ev, true);
  out.kantorovich_distance = kantorovich_distance(d.gradient, *d.hessian).distance;
  const Solvability s = solvability_check(problem, caches, solution);
  out.rho_squared = s.rho_squared;
  out.gamma_squared = s.gamma_squared;
  out.solvable_by_curvature = s.solvable;
  out.suboptimal_reference_cost = reference_cost;
  out.numerically_l2_optimal = optimality_verdict(out.kantorovich_distance, ev.cost, reference_cost);
  return out;
}

}  // namespace l2tri
