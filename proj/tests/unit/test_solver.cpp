#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "gridsoc/solver.hpp"
#include "oracles.hpp"

using namespace gridsoc;

namespace {

// min c'x s.t. rows of (A, b) with the given cones; dense helper for tiny
// hand-written instances.
ConicProgram make_program(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& c, std::vector<Cone> cones) {
  ConicProgram p;
  p.A = a.sparseView();
  p.b = b;
  p.c = c;
  p.cones = std::move(cones);
  return p;
}

}  // namespace

TEST_CASE("analytic LP: min x subject to x >= 1") {
  // s = x - 1 >= 0
  Eigen::MatrixXd a(1, 1);
  a << -1.0;
  Eigen::VectorXd b(1), c(1);
  b << -1.0;
  c << 1.0;
  const ConicProgram program = make_program(a, b, c, {{ConeType::NonNegative, 1}});

  const Solution sol = solve(program);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));

  // residuals of the exact analytic optimum
  Eigen::VectorXd x(1), y(1), s(1);
  x << 1.0;
  y << 1.0;
  s << 0.0;
  const ResidualSet exact = residuals(program, x, y, s);
  CHECK(exact.primal <= 1e-12);
  CHECK(exact.dual <= 1e-12);
  CHECK(exact.gap <= 1e-12);

  // perturbing the primal must show up in the primal residual
  x[0] += 1e-3;
  const ResidualSet perturbed = residuals(program, x, y, s);
  CHECK(perturbed.primal >= 1e-4);
}

TEST_CASE("analytic SOCP: min t subject to ||(3,4)|| <= t") {
  // s = (t, 3, 4) in SOC
  Eigen::MatrixXd a(3, 1);
  a << -1.0, 0.0, 0.0;
  Eigen::VectorXd b(3), c(1);
  b << 0.0, 3.0, 4.0;
  c << 1.0;
  const Solution sol = solve(make_program(a, b, c, {{ConeType::SecondOrder, 3}}));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("solver detects primal infeasibility") {
  // x >= 1 and x <= 0
  Eigen::MatrixXd a(2, 1);
  a << -1.0, 1.0;
  Eigen::VectorXd b(2), c(1);
  b << -1.0, 0.0;
  c << 1.0;
  const Solution sol = solve(make_program(a, b, c, {{ConeType::NonNegative, 2}}));
  CHECK(sol.status == SolveStatus::InfeasibleDetected);
}

TEST_CASE("solver detects unboundedness") {
  // min x s.t. -x >= 0 (x <= 0, objective unbounded below)
  Eigen::MatrixXd a(1, 1);
  a << 1.0;
  Eigen::VectorXd b(1), c(1);
  b << 0.0;
  c << 1.0;
  const Solution sol = solve(make_program(a, b, c, {{ConeType::NonNegative, 1}}));
  CHECK(sol.status == SolveStatus::UnboundedDetected);
}

TEST_CASE("status optimal implies residuals pass an independent recheck") {
  std::mt19937 rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const auto instance = oracle::make_conic_instance(
        rng, 8, {{ConeType::Zero, 2}, {ConeType::NonNegative, 4}, {ConeType::SecondOrder, 4}});
    const Solution sol = solve(instance.program);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ResidualSet check = residuals(instance.program, sol.x, sol.y, sol.s);
    CHECK(check.primal <= 1e-6);
    CHECK(check.dual <= 1e-6);
    CHECK(check.gap <= 1e-6);
  }
}

TEST_CASE("random strictly-feasible SOCPs match the constructed-optimum oracle") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const auto instance = oracle::make_conic_instance(rng, 20,
                                                      {{ConeType::Zero, 3},
                                                       {ConeType::NonNegative, 6},
                                                       {ConeType::SecondOrder, 5},
                                                       {ConeType::RotatedSecondOrder, 4}});
    const Solution sol = solve(instance.program);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective ==
          doctest::Approx(instance.objective).epsilon(1e-5));
  }
}

TEST_CASE("equilibration changes iterates but not the recovered solution") {
  // strongly convex instances (diagonal quadratic) so the argmin is unique
  std::mt19937 rng(71);
  for (int trial = 0; trial < 8; ++trial) {
    auto instance = oracle::make_conic_instance(
        rng, 12, {{ConeType::Zero, 2}, {ConeType::NonNegative, 5}, {ConeType::SecondOrder, 4}},
        true);
    // skew the row scaling to make equilibration do real work
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(instance.program.num_rows());
    scale[0] = 40.0;
    scale[1] = 0.02;
    instance.program.A = scale.asDiagonal() * instance.program.A;
    instance.program.b = scale.cwiseProduct(instance.program.b);
    const ConicProgram lifted = reformulate_quadratic(instance.program);

    SolverConfig with, without;
    with.scaling = true;
    with.primal_tol = with.dual_tol = with.gap_tol = 1e-8;
    without = with;
    without.scaling = false;
    without.max_iterations = 400000;
    const Solution a = solve(lifted, with);
    const Solution b = solve(lifted, without);
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-5));
    CHECK((a.x.head(12) - b.x.head(12)).norm() <= 1e-5 * (1.0 + a.x.norm()));
  }
}

TEST_CASE("solver validates inputs") {
  ConicProgram empty;
  CHECK_THROWS_AS(solve(empty), std::invalid_argument);

  SolverConfig bad;
  bad.relaxation = 2.5;
  Eigen::MatrixXd a(1, 1);
  a << -1.0;
  Eigen::VectorXd b(1), c(1);
  b << -1.0;
  c << 1.0;
  const ConicProgram program = make_program(a, b, c, {{ConeType::NonNegative, 1}});
  CHECK_THROWS_AS(solve(program, bad), std::invalid_argument);

  SolverConfig tiny;
  tiny.max_iterations = 3;
  tiny.check_interval = 1;
  const Solution sol = solve(program, tiny);
  CHECK(sol.status == SolveStatus::MaxIterations);
  CHECK(sol.iterations == 3);
}

TEST_CASE("program dump writes the documented triplet format") {
  Eigen::MatrixXd a(2, 2);
  a << -1.0, 0.0, 0.5, 2.0;
  Eigen::VectorXd b(2), c(2);
  b << -1.0, 3.0;
  c << 1.0, -2.0;
  const ConicProgram program =
      make_program(a, b, c, {{ConeType::Zero, 1}, {ConeType::NonNegative, 1}});
  const std::string path = "dump_test.txt";
  dump_program(program, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  int n = 0, m = 0, nnz = 0;
  std::string cone1, cone2;
  in >> n >> m >> nnz >> cone1 >> cone2;
  CHECK(n == 2);
  CHECK(m == 2);
  CHECK(nnz == 3);
  CHECK(cone1 == "z1");
  CHECK(cone2 == "l1");
  int triplets = 0;
  for (int i = 0; i < nnz; ++i) {
    int row = 0, col = 0;
    double value = 0.0;
    in >> row >> col >> value;
    ++triplets;
  }
  CHECK(triplets == 3);
  std::remove(path.c_str());
}
