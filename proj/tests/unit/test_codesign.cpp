#include <doctest.h>

#include "gridsoc/bnb.hpp"
#include "gridsoc/codesign.hpp"
#include "test_cases.hpp"

using namespace gridsoc;

namespace {

// Relaxation solve + extraction; binaries stay continuous, which is fine for
// the physics checks here (exclusivity is asserted separately in the B&B
// suite).
OperatingSolution solve_case(const CaseData& data, std::array<double, 2> weights,
                             const SizingSpec& sizing, double tol = 1e-8) {
  const CodesignGraph model = build_graph(data, weights, sizing);
  SolverConfig config;
  config.primal_tol = config.dual_tol = config.gap_tol = tol;
  const MibResult relaxed = solve_relaxed(model.graph, weights, config);
  REQUIRE(relaxed.status == MibStatus::Optimal);
  const FlattenResult flat = model.graph.flatten(std::span<const double>(weights.data(), 2));
  OperatingSolution sol = extract_solution(data, model, flat.index,
                                           relaxed.solution.x.head(flat.program.num_vars()));
  sol.scalarized_objective = relaxed.objective;
  return sol;
}

}  // namespace

TEST_CASE("the shipped case builds 240 nodes with 16 binaries") {
  const CaseData data = testcases::case9();
  const CodesignGraph model = build_graph(data, {1.0, 0.0}, SizingSpec::codesign());
  CHECK(model.graph.num_nodes() == 240);
  const FlattenResult flat = model.graph.flatten(std::vector<double>{1.0, 0.0});
  CHECK(flat.program.binaries.size() == 16);

  // column/row counts must equal an independent recount over the graph
  int vars = 0;
  for (int n = 0; n < model.graph.num_nodes(); ++n) {
    vars += static_cast<int>(model.graph.node({n}).variables().size());
  }
  CHECK(flat.program.num_vars() == vars);

  int rows = 0;
  for (int n = 0; n < model.graph.num_nodes(); ++n) {
    const NodeModel& node = model.graph.node({n});
    rows += static_cast<int>(node.constraints().size());
    for (const ConicBlock& blk : node.cones()) rows += static_cast<int>(blk.rows.size());
  }
  rows += model.graph.num_links();
  for (int n = 0; n < model.graph.num_nodes(); ++n) {
    for (const Variable& v : model.graph.node({n}).variables()) {
      if (v.lower > -kInf) ++rows;
      if (v.upper < kInf) ++rows;
    }
  }
  CHECK(flat.program.num_rows() == rows);
}

TEST_CASE("weights must lie on the 2-simplex") {
  const CaseData data = testcases::single_bus();
  CHECK_THROWS_AS(build_graph(data, {0.7, 0.7}, SizingSpec::codesign()), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(data, {-0.1, 1.1}, SizingSpec::codesign()), std::invalid_argument);
}

TEST_CASE("fixed sizing pinches the size columns by equal bounds") {
  const CaseData data = testcases::two_bus();
  const CodesignGraph model = build_graph(data, {1.0, 0.0}, SizingSpec::fixed({12.0}));
  const FlattenResult flat = model.graph.flatten(std::vector<double>{1.0, 0.0});
  const NodeHandle bat = model.layout.battery(0, 0);
  const int col = flat.index.column(bat, model.layout.battery_vars.bs);
  const auto& info = flat.index.columns[col];
  CHECK(flat.program.b[info.lower_bound_row] == doctest::Approx(-12.0));
  CHECK(flat.program.b[info.upper_bound_row] == doctest::Approx(12.0));

  CHECK_THROWS_AS(build_graph(data, {1.0, 0.0}, SizingSpec::fixed({1.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_graph(data, {1.0, 0.0}, SizingSpec::fixed({12.0, 12.0})),
                  std::invalid_argument);
}

TEST_CASE("single bus with zero load solves to the all-zero operating point") {
  const CaseData data = testcases::single_bus();
  const OperatingSolution sol = solve_case(data, {1.0, 0.0}, SizingSpec::codesign());
  for (int t = 0; t < sol.horizon; ++t) {
    CHECK(std::abs(sol.gen_p[t][0]) <= 1e-6);
  }
  CHECK(sol.total_cost == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(sol.total_loss_mwh == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("evaluate_objectives recomputes from raw quantities") {
  const CaseData data = testcases::two_bus();
  OperatingSolution sol;
  sol.horizon = data.horizon;
  const auto zeros = [&](int n) {
    return std::vector<std::vector<double>>(data.horizon, std::vector<double>(n, 0.0));
  };
  sol.c_diag = zeros(2);
  sol.c_off = zeros(1);
  sol.s_off = zeros(1);
  sol.v_diag = zeros(2);
  sol.v_off = zeros(1);
  sol.gen_p = zeros(1);
  sol.gen_q = zeros(1);
  sol.conv_p_ac = zeros(1);
  sol.conv_loss = zeros(1);
  sol.conv_p_dc = zeros(1);
  sol.charge_mw = zeros(1);
  sol.discharge_mw = zeros(1);
  sol.soc_mwh = zeros(1);
  sol.indicator = zeros(1);
  sol.sizes_mwh = {5.0};

  SUBCASE("all-zero operation leaves only the installation term") {
    const auto [cost, loss] = evaluate_objectives(data, sol);
    // install_rate 0.01 * 5 MWh + fuel constants 10 * (1.0 + 1.5 + 0.9)
    CHECK(cost == doctest::Approx(0.01 * 5.0 + 10.0 * 3.4));
    CHECK(loss == doctest::Approx(0.0));
  }

  SUBCASE("a converter drawing 0.5 p.u. contributes beta * 0.5 per hour") {
    sol.conv_p_dc[0][0] = 0.5;
    sol.conv_loss[0][0] = 0.03 * 0.5;
    const auto [cost, loss] = evaluate_objectives(data, sol);
    CHECK(loss == doctest::Approx(0.015 * 100.0));  // MWh over one hour
  }
}

TEST_CASE("two-bus system solves with tight physics") {
  const CaseData data = testcases::two_bus();
  const OperatingSolution sol = solve_case(data, {1.0, 0.0}, SizingSpec::codesign());

  const PhysicsReport physics = check_physics(data, sol);
  CHECK(physics.max_p_balance <= 1e-5);
  CHECK(physics.max_q_balance <= 1e-5);
  CHECK(physics.max_dc_balance <= 1e-5);
  CHECK(physics.max_converter_balance <= 1e-5);
  CHECK(physics.max_loss_gap <= 1e-5);
  CHECK(physics.max_soc_violation <= 1e-6);
  CHECK(physics.max_soc_dynamics <= 1e-6);
  CHECK(physics.max_voltage_violation <= 1e-6);
  CHECK(physics.max_droop_violation <= 1e-6);

  // scalarized objective decomposes into the recomputed cost at w = (1, 0)
  CHECK(sol.total_cost ==
        doctest::Approx(sol.scalarized_objective).epsilon(1e-8));
}

TEST_CASE("voltage recovery inverts the lifting") {
  const CaseData data = testcases::two_bus();

  SUBCASE("flat profile has unit magnitudes, zero angles, zero gaps") {
    OperatingSolution sol;
    sol.horizon = 1;
    sol.c_diag = {{1.0, 1.0}};
    sol.c_off = {{1.0}};
    sol.s_off = {{0.0}};
    sol.v_diag = {{1.0, 1.0}};
    sol.v_off = {{1.0}};
    const auto [profile, report] = recover_voltages(data, sol);
    CHECK(profile.ac_magnitude[0][0] == doctest::Approx(1.0));
    CHECK(profile.ac_magnitude[0][1] == doctest::Approx(1.0));
    CHECK(profile.ac_angle[0][1] == doctest::Approx(0.0));
    CHECK(profile.dc_voltage[0][0] == doctest::Approx(1.0));
    CHECK(report.max_ac_gap == doctest::Approx(0.0));
    CHECK(report.flagged == 0);
  }

  SUBCASE("a 0.19 cone gap is flagged as inexact") {
    OperatingSolution sol;
    sol.horizon = 1;
    sol.c_diag = {{1.0, 1.0}};
    sol.c_off = {{0.9}};
    sol.s_off = {{0.0}};
    sol.v_diag = {{1.0, 1.0}};
    sol.v_off = {{1.0}};
    const auto [profile, report] = recover_voltages(data, sol);
    CHECK(report.ac_gap[0][0] == doctest::Approx(0.19));
    CHECK(report.flagged == 1);
  }

  SUBCASE("negative squared voltages beyond tolerance are an error") {
    OperatingSolution sol;
    sol.horizon = 1;
    sol.c_diag = {{-0.5, 1.0}};
    sol.c_off = {{0.9}};
    sol.s_off = {{0.0}};
    sol.v_diag = {{1.0, 1.0}};
    sol.v_off = {{1.0}};
    CHECK_THROWS_AS(recover_voltages(data, sol), std::runtime_error);
  }

  SUBCASE("solved case reports per-branch gaps") {
    const OperatingSolution sol = solve_case(data, {1.0, 0.0}, SizingSpec::codesign());
    const auto [profile, report] = recover_voltages(data, sol);
    CHECK(report.ac_gap[0].size() == data.ac_branches.size());
    CHECK(report.dc_gap[0].size() == data.dc_branches.size());
    for (int t = 0; t < sol.horizon; ++t) {
      CHECK(report.ac_gap[t][0] >= -1e-7);  // cone feasibility
      CHECK(report.dc_gap[t][0] >= -1e-7);
    }
  }
}

TEST_CASE("battery schedule substitutions") {
  OperatingSolution sol;
  sol.horizon = 3;
  sol.charge_mw = {{5.0}, {0.0}, {0.0}};
  sol.discharge_mw = {{0.0}, {2.0}, {0.0}};
  // state of charge consistent with eta_ch = 0.8, eta_dis = 1.1, SC0 = 10
  sol.soc_mwh = {{14.0}, {11.8}, {11.8}};
  const auto schedule = battery_schedule(sol);
  REQUIRE(schedule.size() == 1);
  CHECK(schedule[0][0].net_mw == doctest::Approx(5.0));
  CHECK(schedule[0][0].soc_mwh == doctest::Approx(14.0));  // 10 + 0.8 * 5
  CHECK(schedule[0][1].net_mw == doctest::Approx(-2.0));
  CHECK(schedule[0][1].soc_mwh == doctest::Approx(11.8));  // 14 - 1.1 * 2
  CHECK(schedule[0][2].net_mw == doctest::Approx(0.0));
  CHECK(schedule[0][2].soc_mwh == doctest::Approx(11.8));  // idle hour
}

TEST_CASE("demand scaling") {
  const CaseData data = testcases::two_bus();
  const CaseData same = demand_scale(data, 1.0);
  CHECK(same.ac_buses[1].pd == doctest::Approx(0.5));
  const CaseData scaled = demand_scale(data, 0.98);
  CHECK(scaled.ac_buses[1].pd == doctest::Approx(0.49));
  CHECK(scaled.ac_buses[1].qd == doctest::Approx(0.098));
  CHECK_THROWS_AS(demand_scale(data, 0.0), std::invalid_argument);

  int variants = 0;
  for (double f = 0.98; f <= 1.04 + 1e-9; f += 0.01) ++variants;
  CHECK(variants == 7);
}

TEST_CASE("the shipped case solves at the cost anchor") {
  const CaseData data = testcases::case9();
  const OperatingSolution sol = solve_case(data, {1.0, 0.0}, SizingSpec::codesign(), 1e-6);

  const PhysicsReport physics = check_physics(data, sol);
  CHECK(physics.max_p_balance <= 1e-5);
  CHECK(physics.max_q_balance <= 1e-5);
  CHECK(physics.max_dc_balance <= 1e-5);
  CHECK(physics.max_loss_gap <= 1e-5);
  CHECK(physics.max_soc_violation <= 1e-6);
  CHECK(physics.max_voltage_violation <= 1e-6);

  // objective recomputation against the solver's scalarized value
  CHECK(sol.total_cost == doctest::Approx(sol.scalarized_objective).epsilon(1e-8));

  // sizes stay within their declared box
  for (double bs : sol.sizes_mwh) {
    CHECK(bs >= 20.0 - 1e-6);
    CHECK(bs <= 120.0 + 1e-6);
  }
}
