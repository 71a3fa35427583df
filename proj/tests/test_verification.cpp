#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "l2tri/derivatives.hpp"
#include "l2tri/examples.hpp"
#include "l2tri/initializer.hpp"
#include "l2tri/solver.hpp"
#include "l2tri/verification.hpp"
#include "oracle.hpp"
#include "scene.hpp"

using namespace l2tri;

namespace {

double largest_magnitude_eigenvalue(const MatX& k) {
  return Eigen::SelfAdjointEigenSolver<MatX>(k).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("pseudo-inverse of orthonormal columns is the transpose") {
  testing::Rng rng(1);
  const Mat3 q = testing::random_rotation(rng);
  MatX j = MatX::Zero(6, 3);
  j.topRows<3>() = q;
  const PseudoInverse p = pseudo_inverse_jacobian(j);
  CHECK((p.matrix - j.transpose()).norm() < 1e-14);
  CHECK(p.rank == 3);
  CHECK_FALSE(p.rank_deficient());
}

TEST_CASE("pseudo-inverse of stacked scaled identities") {
  MatX j(6, 3);
  j << 2, 0, 0,
       0, 2, 0,
       0, 0, 2,
       1, 0, 0,
       0, 1, 0,
       0, 0, 1;
  // J^T J = 5 I, so J^+ = J^T / 5.
  CHECK((pseudo_inverse_jacobian(j).matrix - j.transpose() / 5.0).norm() < 1e-15);
}

TEST_CASE("Penrose identities on random matrices, including rank-deficient ones") {
  testing::Rng rng(2);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    MatX j(10, 3);
    for (Eigen::Index r = 0; r < 10; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) j(r, c) = gauss(rng);
    if (trial % 5 == 0) j.col(2) = j.col(0) - 2.0 * j.col(1);
    const PseudoInverse p = pseudo_inverse_jacobian(j);
    const MatX& a = p.matrix;
    CHECK((j * a * j - j).norm() <= 1e-10 * j.norm());
    CHECK((a * j * a - a).norm() <= 1e-10 * a.norm());
    CHECK(((j * a).transpose() - j * a).norm() <= 1e-10);
    CHECK(((a * j).transpose() - a * j).norm() <= 1e-10);
    CHECK(p.rank_deficient() == (trial % 5 == 0));
  }
}

TEST_CASE("curvature matrix vanishes at a zero-residual point") {
  testing::Rng rng(3);
  const auto scene = testing::random_scene(rng, 4);
  const auto caches = build_caches(scene.problem, DerivativeOrder::second);
  CHECK(curvature_matrix(scene.problem, caches, scene.truth).norm() < 1e-12);
  const Solvability s = solvability_check(scene.problem, caches, scene.truth);
  CHECK(s.gamma_squared < 1e-28);
  CHECK(s.solvable);
}

TEST_CASE("curvature matrix is symmetric and consistent with its eigenvalue") {
  testing::Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scene = testing::random_scene(rng, static_cast<std::size_t>(2 + trial % 6), 0.05);
    const auto caches = build_caches(scene.problem, DerivativeOrder::second);
    const ScenePoint x = initialize(scene.problem).point;
    const MatX k = curvature_matrix(scene.problem, caches, x);
    CHECK(k.rows() == static_cast<Eigen::Index>(2 * scene.problem.size()));
    CHECK((k - k.transpose()).norm() <= 1e-12 * k.norm());
    const Solvability s = solvability_check(scene.problem, caches, x);
    const double lambda = largest_magnitude_eigenvalue(k);
    CHECK(s.rho_squared * lambda * lambda == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.margin() == doctest::Approx(s.rho_squared / s.gamma_squared));
  }
}

TEST_CASE("curvature radius matches a difference reconstruction") {
  const auto examples = synthetic_examples();
  const auto reconstructed_lambda = [](const TriangulationProblem& problem, const ScenePoint& x) {
    const testing::Oracle oracle(problem);
    const MatX j = oracle.exact_jacobian(x);
    const MatX second = oracle.central_hessian(x) - j.transpose() * j;
    const MatX pinv = j.completeOrthogonalDecomposition().pseudoInverse();
    const MatX k = -(pinv.transpose() * second * pinv);
    return largest_magnitude_eigenvalue(0.5 * (k + k.transpose()));
  };

  // Two views at the SA2 optimum: K vanishes, both computations only see rounding.
  const auto& sa2 = examples[0];
  const ScenePoint x2 = solve(sa2.problem).solution;
  const auto caches2 = build_caches(sa2.problem, DerivativeOrder::second);
  const Solvability s2 = solvability_check(sa2.problem, caches2, x2);
  CHECK(s2.rho_squared > 1e12);
  CHECK(reconstructed_lambda(sa2.problem, x2) < 1e-6);
  CHECK(s2.gamma_squared == doctest::Approx(1.0 / 18));

  const auto& con = examples[3];
  const ScenePoint x = solve(con.problem).solution;
  const auto caches = build_caches(con.problem, DerivativeOrder::second);
  const Solvability s = solvability_check(con.problem, caches, x);
  const double lambda = reconstructed_lambda(con.problem, x);
  CHECK(s.rho_squared == doctest::Approx(1.0 / (lambda * lambda)).epsilon(1e-5));
}

TEST_CASE("Kantorovich distance") {
  const auto ex = synthetic_examples()[0];
  const auto caches = build_caches(ex.problem, DerivativeOrder::second);
  const ScenePoint optimum(-3.0 / 11, -2.0 / 11, 7.0 / 11);
  CHECK(kantorovich_distance(ex.problem, caches, optimum).distance < 1e-15);
  CHECK(kantorovich_distance(ex.problem, caches, solve(ex.problem).solution).distance <= kStationarityThreshold);

  for (int axis = 0; axis < 3; ++axis) {
    ScenePoint x = optimum;
    x[axis] += 1e-4;
    const double klc = kantorovich_distance(ex.problem, caches, x).distance;
    CHECK(klc >= 1e-5);
    CHECK(klc <= 1e-3);
  }
  const ScenePoint x = optimum + Vec3::Constant(1e-4);
  const double klc = kantorovich_distance(ex.problem, caches, x).distance;
  CHECK(klc >= Vec3::Constant(1e-4).norm() / 10.0);
  CHECK(klc <= Vec3::Constant(1e-4).norm() * 10.0);
}

TEST_CASE("Kantorovich distance equals the Newton step length") {
  testing::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scene = testing::random_scene(rng, 3, 0.02);
    const auto caches = build_caches(scene.problem, DerivativeOrder::second);
    const ScenePoint x = initialize(scene.problem).point;
    const auto ev = evaluate_residual(scene.problem, x);
    const auto d = evaluate_derivatives(scene.problem, caches, x, ev, true);
    const auto step = newton_step(d.gradient, *d.hessian);
    if (!step) continue;
    CHECK(kantorovich_distance(scene.problem, caches, x).distance ==
          doctest::Approx(step->norm()).epsilon(1e-12));
  }
}

TEST_CASE("singular Hessian falls back to a pseudo-inverse solve") {
  const KantorovichResult r = kantorovich_distance(Vec3(1, 0, 0), Vec3(1, 0, 0).asDiagonal().toDenseMatrix());
  CHECK(r.singular);
  CHECK(r.distance == doctest::Approx(1.0));
  CHECK_FALSE(kantorovich_distance(Vec3(1, 0, 0), Mat3::Identity()).singular);
}

TEST_CASE("optimality verdict arms") {
  CHECK(optimality_verdict(1e-9, 1.0, 1.0));
  CHECK_FALSE(optimality_verdict(1e-7, 1.0, 2.0));
  CHECK_FALSE(optimality_verdict(1e-9, 2.0, 1.0));
  // lowering the cost never flips a true verdict
  for (double cost : {1.0, 0.5, 0.0}) CHECK(optimality_verdict(kStationarityThreshold, cost, 1.0));
}

TEST_CASE("verdict on the benchmark examples") {
  for (const auto& ex : synthetic_examples()) {
    CAPTURE(ex.name);
    const SolveReport r = solve(ex.problem);
    const OptimalityReport v = verify(ex.problem, r.solution, r.initial_cost);
    CHECK(v.numerically_l2_optimal);
    CHECK(v.kantorovich_distance <= kStationarityThreshold);
    CHECK(v.gamma_squared == doctest::Approx(r.cost));
    CHECK(v.suboptimal_reference_cost == r.initial_cost);
    CHECK(v.solvable_by_curvature == (v.rho_squared >= v.gamma_squared));
  }
  const auto con = synthetic_examples()[3];
  const double start_cost = evaluate_residual(con.problem, initialize(con.problem).point).cost;
  const OptimalityReport benchmark = verify(con.problem, con_benchmark_point(), start_cost);
  CHECK(benchmark.gamma_squared == doctest::Approx(kConBenchmarkCost).epsilon(1e-12));
  CHECK_FALSE(benchmark.numerically_l2_optimal);
}

TEST_CASE("curvature rule of thumb on Con") {
  const auto con = synthetic_examples()[3];
  const auto caches = build_caches(con.problem, DerivativeOrder::second);
  // Recorded values: at the start the curvature radius is just below the cost,
  // at the optimum it is well above it.
  const Solvability start = solvability_check(con.problem, caches, initialize(con.problem).point);
  CHECK(start.gamma_squared == doctest::Approx(1.5025).epsilon(1e-4));
  CHECK(start.rho_squared == doctest::Approx(1.3944).epsilon(1e-3));
  CHECK_FALSE(start.solvable);
  const Solvability optimum = solvability_check(con.problem, caches, solve(con.problem).solution);
  CHECK(optimum.rho_squared == doctest::Approx(2.948).epsilon(1e-3));
  CHECK(optimum.solvable);
}

TEST_CASE("verdict is false at a noisy symmedian point") {
  testing::Rng rng(6);
  const auto scene = testing::random_scene(rng, 3, 0.03);
  const ScenePoint x = initialize(scene.problem).point;
  const double f = evaluate_residual(scene.problem, x).cost;
  const OptimalityReport v = verify(scene.problem, x, f);
  CHECK(v.kantorovich_distance > kStationarityThreshold);
  CHECK_FALSE(v.numerically_l2_optimal);
}

TEST_CASE("curvature flag against multistart on large-noise two-view problems") {
  // Observations displaced by 30% of the image extent.
  testing::Rng rng(7);
  int solvable = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto scene = testing::random_scene(rng, 2, 0.3 * 0.4);
    const auto caches = build_caches(scene.problem, DerivativeOrder::second);
    const ScenePoint start = initialize(scene.problem).point;
    const Solvability s = solvability_check(scene.problem, caches, start);
    if (!s.solvable) continue;
    ++solvable;
    SolverConfig gn;
    gn.method = Method::gauss_newton;
    const SolveReport r = solve(scene.problem, gn);
    const testing::Oracle oracle(scene.problem);
    const auto best = oracle.multistart(start, 50, 0.5, rng);
    CHECK(r.cost <= best.best_cost + 1e-9);
  }
  CHECK(solvable > 0);
}

TEST_CASE("a stationary point costlier than the reference cost fails the cost arm") {
  testing::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto scene = testing::random_scene(rng, 3, 0.05 * 0.4);
    SolverConfig nr;
    nr.method = Method::newton_raphson;
    const SolveReport r = solve(scene.problem, nr);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.cost > 0.0);
    const OptimalityReport v = verify(scene.problem, r.solution, 0.5 * r.cost);
    CHECK(v.kantorovich_distance <= kStationarityThreshold);
    CHECK_FALSE(v.numerically_l2_optimal);
  }
}
