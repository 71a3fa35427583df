#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "l2tri/core.hpp"

namespace l2tri {

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

enum class Method {
  newton_raphson,
  gauss_newton,
  levenberg_marquardt,
  gn_line_search,
  gn_trust_region,
};

std::string_view to_string(Method method);
/// Throws InvalidConfig for an unknown name.
Method parse_method(std::string_view name);

/// Cost that a plain Gauss-Newton step must not exceed for the globalization
/// to stay disengaged.
enum class HybridReference {
  initial_cost,  ///< f(X_0), the symmedian-point cost; may accept increases
  current_cost,  ///< f(X_k), accepted costs never increase
};

struct LineSearchParams {
  double gamma = 0.01;
  double delta = 0.25;
  int max_backtracks = 20;
  /// Use f(x + a d) <= f(x) + gamma a slope instead of the cubic test.
  bool classical_armijo = false;
};

struct TrustRegionParams {
  double initial_radius = 1.0;
  double eta_s = 0.1;
  double eta_v = 0.9;
  double gamma_inc = 4.0;
  double gamma_red = 0.25;
  double inner_eps = 1e-8;
  int max_inner = 100;
  /// Model the inner problem with the full Hessian instead of J^T J.
  bool use_hessian = false;
};

struct SolverConfig {
  Method method = Method::gn_line_search;
  double gradient_tol = 1e-10;
  /// Relative: stop once ||step|| <= step_tol * (1 + ||X||).
  double step_tol = 1e-14;
  int max_iterations = 50;
  LineSearchParams line_search;
  TrustRegionParams trust_region;
  /// mu_k = ||r(X_k)||^exponent, exponent in (1, 2).
  double lm_delta_exponent = 1.5;
  HybridReference hybrid_reference = HybridReference::current_cost;
  bool record_trace = true;

  /// Throws InvalidConfig when a parameter is outside its admissible range.
  void validate() const;
};

enum class SolveStatus {
  /// K_LC <= kStationarityThreshold and ||g|| <= max(gradient_tol, 1e-8 (1 + cost)).
  converged,
  /// Stopped without a certified stationary point: iteration budget, stalled
  /// globalization, or a vanishing gradient far from any minimum.
  max_iterations,
  degenerate_geometry,
  depth_degenerate,
};

std::string_view to_string(SolveStatus status);
SolveStatus parse_status(std::string_view name);

struct TraceEntry {
  int iteration = 0;
  double cost = 0.0;
  double gradient_norm = 0.0;
  double step_norm = 0.0;
  bool globalization_engaged = false;
  bool line_search_exhausted = false;
  bool newton_fallback = false;
};

/// Kantorovich-distance threshold certifying a numerically stationary point.
inline constexpr double kStationarityThreshold = 1.49e-8;

struct SolveReport {
  ScenePoint solution = ScenePoint::Zero();
  double cost = 0.0;
  ScenePoint initial_point = ScenePoint::Zero();
  double initial_cost = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iterations;
  double gradient_norm = 0.0;
  double kantorovich_distance = 0.0;
  bool initializer_fallback = false;
  std::vector<TraceEntry> trace;
};

// ---------------------------------------------------------------------------
// Steps
// ---------------------------------------------------------------------------

/// d = -H^{-1} g. Returns nullopt when H is indefinite so the caller can fall
/// back to a Gauss-Newton step. Throws SingularSystem when H stays singular
/// after a 1e-12 trace(H) shift.
std::optional<Vec3> newton_step(const Vec3& g, const Mat3& h);

/// s = -(J^T J)^{-1} g. Throws SingularSystem.
Vec3 gauss_newton_step(const Vec3& g, const Mat3& jtj);

/// p = -(J^T J + mu I)^{-1} g. mu == 0 is exactly the Gauss-Newton step.
Vec3 lm_step(const Vec3& g, const Mat3& jtj, double mu);

double lm_damping(double residual_norm, double exponent);

// ---------------------------------------------------------------------------
// Globalization
// ---------------------------------------------------------------------------

using CostFunction = std::function<double(const Vec3&)>;

struct LineSearchResult {
  double alpha = 1.0;
  double cost = 0.0;  ///< f(x + alpha d)
  int trials = 0;
  bool exhausted = false;
};

/// Backtracking over alpha = delta^i, i = 0 .. max_backtracks - 1, accepting
/// the first alpha with f(x + alpha d) <= f(x) - gamma alpha^3 ||d||^3. When no
/// trial passes, the last alpha is returned with exhausted set. `slope` is the
/// directional derivative of f along d, used only by the classical variant.
LineSearchResult armijo_line_search(const CostFunction& cost, const Vec3& x, double fx, const Vec3& d,
                                    const LineSearchParams& params, double slope = 0.0);

/// Quadratic model of half the cost around a point: value, gradient g and
/// curvature B (J^T J, or the Hessian).
struct LocalModel {
  double cost = 0.0;  ///< full cost f = sum phi^2
  Vec3 gradient = Vec3::Zero();
  Mat3 curvature = Mat3::Zero();
};

using ModelFunction = std::function<std::optional<LocalModel>(const Vec3&)>;

/// Steihaug-Toint truncated conjugate gradient for min g^T s + s^T B s / 2
/// subject to ||s|| <= radius.
Vec3 steihaug_cg(const Vec3& g, const Mat3& b, double radius, double tolerance = 1e-12);

struct TrustRegionResult {
  Vec3 step = Vec3::Zero();
  double cost = 0.0;  ///< cost at x + step
  int inner_iterations = 0;
  int accepted = 0;
  bool progress = false;
  /// rho of the first inner iteration and the radius after it, for diagnostics.
  double first_ratio = 0.0;
  double first_radius = 0.0;
};

/// Trust-region inner loop started from x with model `at_x`; the model is
/// re-evaluated at every accepted inner iterate. Returns the accumulated
/// accepted step (zero when nothing was accepted).
TrustRegionResult trust_region_step(const ModelFunction& model, const Vec3& x, const LocalModel& at_x,
                                    const TrustRegionParams& params);

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Initializes at the symmedian point and iterates the configured method.
SolveReport solve(const TriangulationProblem& problem, const SolverConfig& config = {});

/// Same iteration from an explicit starting point.
SolveReport solve_from(const TriangulationProblem& problem, const SolverConfig& config,
                       const ScenePoint& start);

}  // namespace l2tri
