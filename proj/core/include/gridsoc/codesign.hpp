#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gridsoc/case_data.hpp"
#include "gridsoc/graph.hpp"

namespace gridsoc {

struct SizingSpec {
  enum class Mode { Codesign, Fixed };
  Mode mode = Mode::Codesign;
  std::vector<double> sizes;  // MWh per battery, Fixed mode only

  static SizingSpec codesign() { return {}; }
  static SizingSpec fixed(std::vector<double> sizes) {
    SizingSpec s;
    s.mode = Mode::Fixed;
    s.sizes = std::move(sizes);
    return s;
  }
};

// Where each component's variables live inside the hour-replicated graph.
// The per-hour structure is identical, so local indices are hour-invariant.
struct CodesignLayout {
  int horizon = 0;
  int n_ac_bus = 0, n_ac_branch = 0, n_dc_bus = 0, n_dc_branch = 0;
  int n_converter = 0, n_battery = 0;

  int nodes_per_hour() const {
    return n_ac_bus + n_ac_branch + n_dc_bus + n_dc_branch + n_converter + n_battery;
  }
  NodeHandle ac_bus(int t, int i) const { return {t * nodes_per_hour() + i}; }
  NodeHandle ac_branch(int t, int e) const { return {t * nodes_per_hour() + n_ac_bus + e}; }
  NodeHandle dc_bus(int t, int i) const {
    return {t * nodes_per_hour() + n_ac_bus + n_ac_branch + i};
  }
  NodeHandle dc_branch(int t, int e) const {
    return {t * nodes_per_hour() + n_ac_bus + n_ac_branch + n_dc_bus + e};
  }
  NodeHandle converter(int t, int c) const {
    return {t * nodes_per_hour() + n_ac_bus + n_ac_branch + n_dc_bus + n_dc_branch + c};
  }
  NodeHandle battery(int t, int s) const {
    return {t * nodes_per_hour() + n_ac_bus + n_ac_branch + n_dc_bus + n_dc_branch + n_converter +
            s};
  }

  struct AcBusVars {
    int cii = -1;
    std::vector<int> branch_ids;  // incident branches, case order
    std::vector<int> c_dir, s_dir;
    std::vector<int> gen_ids, pg, qg;
    std::vector<int> conv_ids, pconv;
    std::vector<int> battery_ids, pch, pdis;
  };
  struct DcBusVars {
    int vii = -1;
    std::vector<int> branch_ids;
    std::vector<int> v_dir;
    std::vector<int> conv_ids, pdc;
  };
  // AC branch node: c, s, from-bus cii mirror, to-bus cjj mirror, loss (MW).
  struct AcBranchVars {
    int c = 0, s = 1, cii = 2, cjj = 3, loss = 4;
  };
  // DC branch node: v, from-bus vii mirror, to-bus vjj mirror, loss (MW).
  struct DcBranchVars {
    int v = 0, vii = 1, vjj = 2, loss = 3;
  };
  // Converter node: AC-side injection, loss, DC-side draw (all p.u.), plus a
  // mirror of the DC terminal's squared voltage for the droop cone.
  struct ConverterVars {
    int pconv = 0, ploss = 1, pdc = 2, vdd = 3;
  };
  // Battery node: size (MWh), state of charge (MWh), charge/discharge (MW),
  // and the charge-or-discharge indicator.
  struct BatteryVars {
    int bs = 0, soc = 1, pch = 2, pdis = 3, z = 4;
  };

  std::vector<AcBusVars> ac_bus_vars;
  std::vector<DcBusVars> dc_bus_vars;
  AcBranchVars ac_branch_vars;
  DcBranchVars dc_branch_vars;
  ConverterVars converter_vars;
  BatteryVars battery_vars;
};

struct CodesignGraph {
  ModelGraph graph;
  CodesignLayout layout;
  SizingSpec sizing;
  std::array<double, 2> weights{1.0, 0.0};
};

// One node per component per hour; cone rows on branch/converter nodes,
// balances on bus nodes, dynamics/ramps/symmetry ties as edges. Objective 1
// is total cost (currency), objective 2 total loss (MWh).
CodesignGraph build_graph(const CaseData& data, std::array<double, 2> weights,
                          const SizingSpec& sizing);

struct OperatingSolution {
  int horizon = 0;
  // [hour][component]; AC branch entries are the canonical from-side pair.
  std::vector<std::vector<double>> c_diag, c_off, s_off;
  std::vector<std::vector<double>> v_diag, v_off;
  std::vector<std::vector<double>> gen_p, gen_q;
  std::vector<std::vector<double>> conv_p_ac, conv_loss, conv_p_dc;
  std::vector<std::vector<double>> charge_mw, discharge_mw, soc_mwh, indicator;
  std::vector<double> sizes_mwh;
  double total_cost = 0.0;
  double total_loss_mwh = 0.0;
  double scalarized_objective = 0.0;  // as reported by the conic solve
};

OperatingSolution extract_solution(const CaseData& data, const CodesignGraph& model,
                                   const IndexMap& index, const Eigen::VectorXd& x);

// Recomputes (total cost, total loss in MWh) from raw operating quantities,
// independent of the solver's objective bookkeeping.
std::pair<double, double> evaluate_objectives(const CaseData& data, const OperatingSolution& sol);

struct VoltageProfile {
  std::vector<std::vector<double>> ac_magnitude;  // [hour][bus]
  std::vector<std::vector<double>> ac_angle;      // radians, slack bus = first
  std::vector<std::vector<double>> dc_voltage;    // [hour][bus]
};

struct ExactnessReport {
  double threshold = 1e-5;
  std::vector<std::vector<double>> ac_gap;  // [hour][branch]: cii*cjj - c^2 - s^2
  std::vector<std::vector<double>> dc_gap;  // [hour][branch]: vii*vjj - v^2
  std::vector<std::vector<double>> cycle_mismatch;  // [hour][branch], 0 on tree edges
  int flagged = 0;  // entries above threshold
  double max_ac_gap = 0.0, max_dc_gap = 0.0, max_cycle_mismatch = 0.0;
};

std::pair<VoltageProfile, ExactnessReport> recover_voltages(const CaseData& data,
                                                            const OperatingSolution& sol);

struct BatteryScheduleRow {
  int hour = 0;          // 1-based
  double net_mw = 0.0;   // charge positive, discharge negative
  double soc_mwh = 0.0;  // end-of-hour state of charge
};

std::vector<std::vector<BatteryScheduleRow>> battery_schedule(const OperatingSolution& sol);

struct PhysicsReport {
  double max_p_balance = 0.0;
  double max_q_balance = 0.0;
  double max_dc_balance = 0.0;
  double max_converter_balance = 0.0;
  double max_loss_gap = 0.0;     // |ploss - beta*|pdc||
  double max_droop_violation = 0.0;   // (k pconv + d)^2 - vdd above 0
  double droop_slack = 0.0;      // max |k pconv + d - sqrt(vdd)| (diagnostic)
  double max_soc_violation = 0.0;
  double max_soc_dynamics = 0.0;
  double max_exclusivity = 0.0;  // min(pch, pdis)
  double max_voltage_violation = 0.0;
  double max_ac_cone_gap = 0.0;  // diagnostic only
  double max_dc_cone_gap = 0.0;
};

PhysicsReport check_physics(const CaseData& data, const OperatingSolution& sol);

}  // namespace gridsoc
