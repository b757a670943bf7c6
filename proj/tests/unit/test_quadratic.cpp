#include <doctest.h>

#include <random>

#include "gridsoc/solver.hpp"
#include "oracles.hpp"

using namespace gridsoc;

namespace {

ConicProgram box_quadratic(double qa, double qb, double qc, double lo, double hi) {
  // min qa x^2 + qb x + qc subject to lo <= x <= hi
  ConicProgram p;
  Eigen::MatrixXd a(2, 1);
  a << -1.0, 1.0;
  p.A = a.sparseView();
  p.b.resize(2);
  p.b << -lo, hi;
  p.c.resize(1);
  p.c << qb;
  p.objective_constant = qc;
  p.cones = {{ConeType::NonNegative, 2}};
  Eigen::MatrixXd q(1, 1);
  q << qa;
  p.quadratic = q.sparseView();
  return p;
}

}  // namespace

TEST_CASE("epigraph reformulation: min x^2 subject to x >= 1") {
  ConicProgram p;
  Eigen::MatrixXd a(1, 1);
  a << -1.0;
  p.A = a.sparseView();
  p.b.resize(1);
  p.b << -1.0;
  p.c = Eigen::VectorXd::Zero(1);
  p.cones = {{ConeType::NonNegative, 1}};
  Eigen::MatrixXd q(1, 1);
  q << 1.0;
  p.quadratic = q.sparseView();

  const ConicProgram lifted = reformulate_quadratic(p);
  CHECK(lifted.num_vars() == 2);
  CHECK_FALSE(lifted.has_quadratic());
  const Solution sol = solve(lifted);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("zero quadratic part returns the program unchanged") {
  ConicProgram p;
  Eigen::MatrixXd a(1, 1);
  a << -1.0;
  p.A = a.sparseView();
  p.b.resize(1);
  p.b << -1.0;
  p.c.resize(1);
  p.c << 1.0;
  p.cones = {{ConeType::NonNegative, 1}};
  const ConicProgram out = reformulate_quadratic(p);
  CHECK(out.num_vars() == 1);
  CHECK(out.num_rows() == 1);
  CHECK(out.c[0] == 1.0);
}

TEST_CASE("archive fuel polynomial evaluates to 150.5011 at the lower bound") {
  // 0.11 p^2 + 5 p + 150 over p in [0.1, 2.5] is increasing, so the optimum
  // sits at p = 0.1 with value 150.5011 (direct evaluation).
  const ConicProgram p = box_quadratic(0.11, 5.0, 150.0, 0.1, 2.5);
  const Solution sol = solve(reformulate_quadratic(p));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(sol.objective == doctest::Approx(150.5011).epsilon(1e-7));
}

TEST_CASE("reformulation preserves optimal values on random PSD instances") {
  std::mt19937 rng(301);
  SolverConfig config;
  config.primal_tol = config.dual_tol = config.gap_tol = 1e-9;
  for (int trial = 0; trial < 12; ++trial) {
    const auto instance = oracle::make_conic_instance(
        rng, 6, {{ConeType::NonNegative, 5}, {ConeType::SecondOrder, 3}}, true);
    const ConicProgram lifted = reformulate_quadratic(instance.program);
    const Solution sol = solve(lifted, config);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(instance.objective).epsilon(1e-6));
  }
}

TEST_CASE("non-PSD quadratic parts are rejected") {
  ConicProgram p = box_quadratic(-1.0, 0.0, 0.0, 0.0, 1.0);
  CHECK_THROWS_AS(reformulate_quadratic(p), std::invalid_argument);

  // indefinite 2x2 with cross terms
  ConicProgram q;
  Eigen::MatrixXd a(2, 2);
  a << -1.0, 0.0, 0.0, -1.0;
  q.A = a.sparseView();
  q.b.resize(2);
  q.b << 0.0, 0.0;
  q.c = Eigen::VectorXd::Zero(2);
  q.cones = {{ConeType::NonNegative, 2}};
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  q.quadratic = bad.sparseView();
  CHECK_THROWS_AS(reformulate_quadratic(q), std::invalid_argument);
}
