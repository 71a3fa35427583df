#include "l2tri/derivative_check.hpp"

#include <cmath>

#include "l2tri/derivatives.hpp"

namespace l2tri {

double difference_step(double x) { return 1e-6 * (1.0 + std::abs(x)); }

MatX finite_difference_jacobian(const TriangulationProblem& problem, const ScenePoint& point) {
  MatX out(2 * static_cast<Eigen::Index>(problem.size()), 3);
  for (int k = 0; k < 3; ++k) {
    const double h = difference_step(point[k]);
    ScenePoint plus = point, minus = point;
    plus[k] += h;
    minus[k] -= h;
    out.col(k) = (evaluate_residual(problem, plus).residuals - evaluate_residual(problem, minus).residuals) /
                 (2.0 * h);
  }
  return out;
}

Mat3 finite_difference_hessian(const TriangulationProblem& problem, const ScenePoint& point) {
  const auto caches = build_caches(problem);
  const auto grad = [&](const ScenePoint& x) {
    return gradient(problem, caches, x, evaluate_residual(problem, x));
  };
  Mat3 out;
  for (int k = 0; k < 3; ++k) {
    const double h = difference_step(point[k]);
    ScenePoint plus = point, minus = point;
    plus[k] += h;
    minus[k] -= h;
    out.col(k) = (grad(plus) - grad(minus)) / (2.0 * h);
  }
  return 0.5 * (out + out.transpose());
}

double relative_error(const MatX& a, const MatX& b) {
  const double scale = b.norm();
  return scale > 0.0 ? (a - b).norm() / scale : a.norm();
}

DerivativeAudit audit_derivatives(const TriangulationProblem& problem, const ScenePoint& point,
                                  double jacobian_tolerance, double hessian_tolerance) {
  const auto caches = build_caches(problem, DerivativeOrder::second);
  const ResidualEvaluation ev = evaluate_residual(problem, point);
  DerivativeAudit out;
  out.jacobian_error = relative_error(jacobian(problem, caches, point), finite_difference_jacobian(problem, point));
  out.hessian_error =
      relative_error(hessian(problem, caches, point, ev), finite_difference_hessian(problem, point));
  out.passed = out.jacobian_error <= jacobian_tolerance && out.hessian_error <= hessian_tolerance;
  return out;
}

}  // namespace l2tri
