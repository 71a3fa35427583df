#include "l2tri/solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "l2tri/derivatives.hpp"
#include "l2tri/initializer.hpp"
#include "l2tri/verification.hpp"

namespace l2tri {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr MethodName kMethodNames[] = {
    {Method::newton_raphson, "newton_raphson"},
    {Method::gauss_newton, "gauss_newton"},
    {Method::levenberg_marquardt, "levenberg_marquardt"},
    {Method::gn_line_search, "gn_line_search"},
    {Method::gn_trust_region, "gn_trust_region"},
};

struct StatusName {
  SolveStatus status;
  std::string_view name;
};

constexpr StatusName kStatusNames[] = {
    {SolveStatus::converged, "converged"},
    {SolveStatus::max_iterations, "max_iterations"},
    {SolveStatus::degenerate_geometry, "degenerate_geometry"},
    {SolveStatus::depth_degenerate, "depth_degenerate"},
};

}  // namespace

std::string_view to_string(Method method) {
  for (const auto& m : kMethodNames)
    if (m.method == method) return m.name;
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& m : kMethodNames)
    if (m.name == name) return m.method;
  // short aliases
  if (name == "nr") return Method::newton_raphson;
  if (name == "gn") return Method::gauss_newton;
  if (name == "lm") return Method::levenberg_marquardt;
  if (name == "gn_ls") return Method::gn_line_search;
  if (name == "gn_tr") return Method::gn_trust_region;
  throw InvalidConfig("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(SolveStatus status) {
  for (const auto& s : kStatusNames)
    if (s.status == status) return s.name;
  return "unknown";
}

SolveStatus parse_status(std::string_view name) {
  for (const auto& s : kStatusNames)
    if (s.name == name) return s.status;
  throw InvalidConfig("unknown status '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  const auto& ls = line_search;
  const auto& tr = trust_region;
  if (!(ls.gamma > 0.0 && ls.gamma < 0.5)) throw InvalidConfig("line search gamma must lie in (0, 0.5)");
  if (!(ls.delta > 0.0 && ls.delta < 1.0)) throw InvalidConfig("line search delta must lie in (0, 1)");
  if (ls.max_backtracks < 1) throw InvalidConfig("line search needs at least one trial");
  if (!(tr.eta_s > 0.0 && tr.eta_s < tr.eta_v && tr.eta_v < 1.0))
    throw InvalidConfig("trust region thresholds must satisfy 0 < eta_s < eta_v < 1");
  if (!(tr.initial_radius > 0.0)) throw InvalidConfig("trust region radius must be positive");
  if (!(tr.gamma_inc > 1.0) || !(tr.gamma_red > 0.0 && tr.gamma_red < 1.0))
    throw InvalidConfig("trust region radius factors out of range");
  if (!(lm_delta_exponent > 1.0 && lm_delta_exponent < 2.0))
    throw InvalidConfig("LM exponent must lie in (1, 2)");
  if (!(gradient_tol >= 0.0) || !(step_tol >= 0.0)) throw InvalidConfig("tolerances must be non-negative");
  if (max_iterations < 0) throw InvalidConfig("max_iterations must be non-negative");
}

// ---------------------------------------------------------------------------
// Steps
// ---------------------------------------------------------------------------

std::optional<Vec3> newton_step(const Vec3& g, const Mat3& h) {
  const Eigen::LLT<Mat3> llt(h);
  if (llt.info() == Eigen::Success) {
    const Vec3 d = llt.solve(g);
    if (d.allFinite()) return Vec3(-d);
  }
  if (!h.allFinite()) throw SingularSystem("non-finite Hessian");
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(h, Eigen::EigenvaluesOnly);
  const double shift = 1e-12 * h.trace();
  if (eig.eigenvalues()[0] < -std::abs(shift)) return std::nullopt;
  const Eigen::LLT<Mat3> shifted(h + shift * Mat3::Identity());
  if (shift <= 0.0 || shifted.info() != Eigen::Success)
    throw SingularSystem("Hessian singular after Tikhonov shift");
  return Vec3(-shifted.solve(g));
}

Vec3 gauss_newton_step(const Vec3& g, const Mat3& jtj) {
  if (!jtj.allFinite() || !g.allFinite()) throw SingularSystem("non-finite normal equations");
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(jtj, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()[0];
  const double hi = eig.eigenvalues()[2];
  Mat3 a = jtj;
  if (!(lo > 1e-14 * hi)) {
    const double shift = 1e-12 * jtj.trace();
    if (!(shift > 0.0) || (hi + shift) / (std::max(lo, 0.0) + shift) > 1e14)
      throw SingularSystem("Gauss-Newton matrix is singular");
    a.diagonal().array() += shift;
  }
  const Eigen::LDLT<Mat3> ldlt(a);
  return -ldlt.solve(g);
}

Vec3 lm_step(const Vec3& g, const Mat3& jtj, double mu) {
  if (mu == 0.0) return gauss_newton_step(g, jtj);
  Mat3 a = jtj;
  a.diagonal().array() += mu;
  const Eigen::LLT<Mat3> llt(a);
  if (llt.info() != Eigen::Success) return gauss_newton_step(g, jtj);
  return -llt.solve(g);
}

double lm_damping(double residual_norm, double exponent) { return std::pow(residual_norm, exponent); }

// ---------------------------------------------------------------------------
// Globalization
// ---------------------------------------------------------------------------

LineSearchResult armijo_line_search(const CostFunction& cost, const Vec3& x, double fx, const Vec3& d,
                                    const LineSearchParams& params, double slope) {
  const double dnorm = d.norm();
  const double dnorm3 = dnorm * dnorm * dnorm;
  LineSearchResult out;
  double alpha = 1.0;
  for (int i = 0; i < params.max_backtracks; ++i) {
    alpha = i == 0 ? 1.0 : alpha * params.delta;
    const double f = cost(x + alpha * d);
    out.alpha = alpha;
    out.cost = f;
    out.trials = i + 1;
    const double bound = params.classical_armijo ? fx + params.gamma * alpha * slope
                                                 : fx - params.gamma * alpha * alpha * alpha * dnorm3;
    if (f <= bound) return out;
  }
  out.exhausted = true;
  return out;
}

namespace {

/// tau >= 0 with ||s + tau p|| = radius.
double boundary_step(const Vec3& s, const Vec3& p, double radius) {
  const double a = p.squaredNorm();
  const double b = 2.0 * s.dot(p);
  const double c = s.squaredNorm() - radius * radius;
  const double disc = std::sqrt(std::max(b * b - 4.0 * a * c, 0.0));
  // c <= 0 inside the region, so the positive root is well conditioned in this form
  return b >= 0.0 ? (-2.0 * c) / (b + disc) : (disc - b) / (2.0 * a);
}

}  // namespace

Vec3 steihaug_cg(const Vec3& g, const Mat3& b, double radius, double tolerance) {
  Vec3 s = Vec3::Zero();
  Vec3 r = g;
  const double gnorm = g.norm();
  if (!(gnorm > 0.0)) return s;
  Vec3 p = -r;
  // three steps in exact arithmetic; a few extra absorb rounding
  for (int j = 0; j < 6; ++j) {
    const Vec3 bp = b * p;
    const double kappa = p.dot(bp);
    if (kappa <= 0.0) return s + boundary_step(s, p, radius) * p;
    const double rr = r.squaredNorm();
    const double alpha = rr / kappa;
    const Vec3 next = s + alpha * p;
    if (next.norm() >= radius) return s + boundary_step(s, p, radius) * p;
    s = next;
    r += alpha * bp;
    if (r.norm() <= tolerance * gnorm) return s;
    p = -r + (r.squaredNorm() / rr) * p;
  }
  return s;
}

TrustRegionResult trust_region_step(const ModelFunction& model, const Vec3& x, const LocalModel& at_x,
                                    const TrustRegionParams& params) {
  TrustRegionResult out;
  Vec3 xi = x;
  LocalModel mi = at_x;
  double radius = params.initial_radius;
  out.cost = at_x.cost;

  for (int i = 0; i < params.max_inner; ++i) {
    if (mi.gradient.norm() <= params.inner_eps) break;
    if (radius <= 1e-15 * (1.0 + xi.norm())) break;

    const Vec3 s = steihaug_cg(mi.gradient, mi.curvature, radius);
    // model of half the cost: predicted reduction -g^T s - s^T B s / 2
    const double predicted = -(s.dot(mi.gradient) + 0.5 * s.dot(mi.curvature * s));
    out.inner_iterations = i + 1;
    if (!(predicted > 0.0)) break;

    const std::optional<LocalModel> trial = model(xi + s);
    const double actual = trial ? 0.5 * (mi.cost - trial->cost) : -kInfinity;
    const double rho = actual / predicted;

    if (rho >= params.eta_v) {
      radius *= params.gamma_inc;
    } else if (rho < params.eta_s) {
      radius *= params.gamma_red;
    }
    if (i == 0) {
      out.first_ratio = rho;
      out.first_radius = radius;
    }
    if (rho >= params.eta_s) {
      xi += s;
      mi = *trial;
      ++out.accepted;
    }
  }

  out.step = xi - x;
  out.cost = mi.cost;
  out.progress = out.accepted > 0;
  return out;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

namespace {

class Iteration {
 public:
  Iteration(const TriangulationProblem& problem, const SolverConfig& config)
      : problem_(problem),
        config_(config),
        uses_hessian_(config.method == Method::newton_raphson ||
                      (config.method == Method::gn_trust_region && config.trust_region.use_hessian)),
        caches_(build_caches(problem, uses_hessian_ ? DerivativeOrder::second : DerivativeOrder::first)) {}

  SolveReport run(const ScenePoint& start, bool fallback);

 private:
  double cost(const Vec3& x) const { return cost_or_infinity(problem_, x); }
  std::optional<LocalModel> model(const Vec3& x) const;
  void finish(SolveReport& report, const ResidualEvaluation& ev) const;

  const TriangulationProblem& problem_;
  const SolverConfig& config_;
  bool uses_hessian_;
  std::vector<CameraDerivativeCache> caches_;
};

std::optional<LocalModel> Iteration::model(const Vec3& x) const {
  ResidualEvaluation ev;
  if (!x.allFinite() || !try_evaluate_residual(problem_, x, ev)) return std::nullopt;
  const DerivativeBundle d = evaluate_derivatives(problem_, caches_, x, ev, config_.trust_region.use_hessian);
  LocalModel m;
  m.cost = ev.cost;
  m.gradient = d.gradient;
  m.curvature = config_.trust_region.use_hessian ? *d.hessian : d.gauss_newton_matrix;
  return m;
}

SolveReport Iteration::run(const ScenePoint& start, bool fallback) {
  SolveReport report;
  report.initial_point = start;
  report.solution = start;
  report.initializer_fallback = fallback;

  ResidualEvaluation ev;
  if (!start.allFinite() || !try_evaluate_residual(problem_, start, ev)) {
    report.status = fallback ? SolveStatus::degenerate_geometry : SolveStatus::depth_degenerate;
    report.cost = report.initial_cost = kInfinity;
    report.gradient_norm = report.kantorovich_distance = kInfinity;
    return report;
  }

  const double f0 = ev.cost;
  report.initial_cost = f0;
  if (config_.record_trace) report.trace.push_back({0, f0, 0.0, 0.0, false, false, false});

  Vec3 x = start;
  bool converged = false;
  bool depth_failure = false;
  int zero_steps = 0;
  const auto set_gradient_norm = [&](double gnorm) {
    if (config_.record_trace) report.trace.back().gradient_norm = gnorm;
  };

  for (int k = 1; k <= config_.max_iterations; ++k) {
    DerivativeBundle d;
    try {
      d = evaluate_derivatives(problem_, caches_, x, ev, uses_hessian_);
    } catch (const DepthNearZero&) {
      depth_failure = true;
      break;
    }
    const double gnorm = d.gradient.norm();
    set_gradient_norm(gnorm);
    if (gnorm <= config_.gradient_tol) {
      converged = true;
      break;
    }

    TraceEntry entry;
    entry.iteration = k;
    Vec3 step = Vec3::Zero();
    ResidualEvaluation next;
    bool moved = false;

    try {
      switch (config_.method) {
        case Method::newton_raphson: {
          const auto nr = newton_step(d.gradient, *d.hessian);
          if (nr) {
            step = *nr;
          } else {
            step = gauss_newton_step(d.gradient, d.gauss_newton_matrix);
            entry.newton_fallback = true;
          }
          break;
        }
        case Method::gauss_newton:
        case Method::gn_line_search:
        case Method::gn_trust_region:
          step = gauss_newton_step(d.gradient, d.gauss_newton_matrix);
          break;
        case Method::levenberg_marquardt:
          step = lm_step(d.gradient, d.gauss_newton_matrix,
                         lm_damping(std::sqrt(ev.cost), config_.lm_delta_exponent));
          break;
      }
    } catch (const SingularSystem&) {
      break;
    }

    const bool globalized =
        config_.method == Method::gn_line_search || config_.method == Method::gn_trust_region;
    if (!globalized) {
      const Vec3 trial = x + step;
      if (!trial.allFinite() || !try_evaluate_residual(problem_, trial, next)) {
        depth_failure = true;
        break;
      }
      moved = true;
    } else {
      const Vec3 trial = x + step;
      const bool defined = trial.allFinite() && try_evaluate_residual(problem_, trial, next);
      const double reference =
          config_.hybrid_reference == HybridReference::initial_cost ? f0 : ev.cost;
      if (defined && next.cost <= reference) {
        moved = true;
      } else {
        entry.globalization_engaged = true;
        if (config_.method == Method::gn_line_search) {
          const auto ls = armijo_line_search([this](const Vec3& p) { return cost(p); }, x, ev.cost, step,
                                             config_.line_search, 2.0 * d.gradient.dot(step));
          entry.line_search_exhausted = ls.exhausted;
          step *= ls.alpha;
          // an exhausted search is only taken when it does not increase the cost
          if (ls.cost <= ev.cost && try_evaluate_residual(problem_, x + step, next)) moved = true;
        } else {
          LocalModel here;
          here.cost = ev.cost;
          here.gradient = d.gradient;
          here.curvature = config_.trust_region.use_hessian ? *d.hessian : d.gauss_newton_matrix;
          const auto tr = trust_region_step([this](const Vec3& p) { return model(p); }, x, here,
                                            config_.trust_region);
          step = tr.step;
          if (tr.progress && try_evaluate_residual(problem_, x + step, next)) moved = true;
        }
      }
    }

    report.iterations = k;
    if (!moved) {
      if (config_.record_trace) {
        entry.cost = ev.cost;
        report.trace.push_back(entry);
      }
      if (++zero_steps >= 2) break;
      continue;
    }
    zero_steps = 0;

    x += step;
    ev = std::move(next);
    entry.cost = ev.cost;
    entry.step_norm = step.norm();
    if (config_.record_trace) report.trace.push_back(entry);
    if (entry.step_norm <= config_.step_tol * (1.0 + x.norm())) break;
  }

  report.solution = x;
  finish(report, ev);
  if (depth_failure && !converged) {
    report.status = SolveStatus::depth_degenerate;
  } else if (report.kantorovich_distance <= kStationarityThreshold &&
             report.gradient_norm <= std::max(config_.gradient_tol, 1e-8 * (1.0 + report.cost))) {
    // a vanishing gradient alone also happens far out where the cost flattens
    report.status = SolveStatus::converged;
  } else {
    report.status = SolveStatus::max_iterations;
  }
  return report;
}

void Iteration::finish(SolveReport& report, const ResidualEvaluation& ev) const {
  report.cost = ev.cost;
  try {
    const auto second = build_caches(problem_, DerivativeOrder::second);
    const DerivativeBundle d = evaluate_derivatives(problem_, second, report.solution, ev, true);
    report.gradient_norm = d.gradient.norm();
    report.kantorovich_distance = kantorovich_distance(d.gradient, *d.hessian).distance;
  } catch (const DepthNearZero&) {
    report.gradient_norm = report.kantorovich_distance = kInfinity;
  }
  if (config_.record_trace && !report.trace.empty()) report.trace.back().gradient_norm = report.gradient_norm;
}

}  // namespace

SolveReport solve_from(const TriangulationProblem& problem, const SolverConfig& config,
                       const ScenePoint& start) {
  config.validate();
  return Iteration(problem, config).run(start, false);
}

SolveReport solve(const TriangulationProblem& problem, const SolverConfig& config) {
  config.validate();
  Initialization init;
  try {
    init = initialize(problem);
  } catch (const SingularCamera&) {
    SolveReport report;
    report.status = SolveStatus::degenerate_geometry;
    report.cost = report.initial_cost = kInfinity;
    report.gradient_norm = report.kantorovich_distance = kInfinity;
    return report;
  }
  return Iteration(problem, config).run(init.point, init.fallback);
}

}  // namespace l2tri
