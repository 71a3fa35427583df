#pragma once

#include "l2tri/core.hpp"

namespace l2tri {

/// Central-difference step for a coordinate of magnitude |x|.
double difference_step(double x);

/// Central differences of the residual vector, 2n x 3.
MatX finite_difference_jacobian(const TriangulationProblem& problem, const ScenePoint& point);

/// Central differences of the analytic gradient J^T r.
Mat3 finite_difference_hessian(const TriangulationProblem& problem, const ScenePoint& point);

/// ||a - b||_F / ||b||_F, or ||a||_F when b vanishes.
double relative_error(const MatX& a, const MatX& b);

struct DerivativeAudit {
  double jacobian_error = 0.0;
  double hessian_error = 0.0;
  bool passed = false;
};

DerivativeAudit audit_derivatives(const TriangulationProblem& problem, const ScenePoint& point,
                                  double jacobian_tolerance = 1e-6, double hessian_tolerance = 1e-5);

}  // namespace l2tri
