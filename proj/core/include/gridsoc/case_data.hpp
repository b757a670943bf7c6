#pragma once

#include <string>
#include <vector>

namespace gridsoc {

// All electrical quantities are per-unit on `mva_base` except battery power
// and energy, which stay in MW / MWh and are converted at the bus balance.

struct AcBus {
  int id = 0;
  double vmin = 0.9, vmax = 1.1;  // voltage magnitude bounds, p.u.
  double pd = 0.0, qd = 0.0;      // nominal demand, p.u.
};

struct AcBranch {
  int from = 0, to = 0;
  double r = 0.0, x = 0.0;  // series impedance, p.u.
  double charging = 0.0;    // total line charging susceptance, p.u.

  double g() const { return r / (r * r + x * x); }  // series conductance
  double b() const { return -x / (r * r + x * x); }
};

struct Generator {
  int bus = 0;
  double pmin = 0.0, pmax = 0.0;
  double qmin = 0.0, qmax = 0.0;
  double ramp_p = 0.0, ramp_q = 0.0;            // per hour
  double cost_a = 0.0, cost_b = 0.0, cost_c = 0.0;  // a P^2 + b P + c, P in p.u.
};

struct DcBus {
  int id = 0;
  double vmin = 0.9, vmax = 1.1;
};

struct DcBranch {
  int from = 0, to = 0;
  double resistance = 0.0;  // p.u.
  double g() const { return 1.0 / resistance; }
};

struct Converter {
  int ac_bus = 0, dc_bus = 0;
  double beta = 0.0;  // loss coefficient
  double k = 0.0, d = 0.0;  // droop parameters
};

struct Battery {
  int ac_bus = 0;
  double bs_min = 0.0, bs_max = 0.0;  // size bounds, MWh
  double p_charge_max = 0.0, p_discharge_max = 0.0;  // MW
  double eta_charge = 1.0;     // in (0, 1]
  double eta_discharge = 1.0;  // >= 1
  double soc_initial = 0.0;      // MWh
  double soc_terminal_min = 0.0; // MWh
  double install_rate = 0.0;     // currency per MWh of size, over the horizon
  double operation_rate = 0.0;   // currency per MWh of charge/discharge throughput
};

struct WindFarm {
  int dc_bus = 0;
  double nominal_mw = 0.0;
};

struct ScheduleFactors {
  std::vector<double> load;
  std::vector<double> wind;
  std::vector<double> fuel_cost;
};

struct CaseData {
  std::string name;
  double mva_base = 100.0;
  int horizon = 0;  // hours
  std::vector<AcBus> ac_buses;
  std::vector<AcBranch> ac_branches;
  std::vector<Generator> generators;
  std::vector<DcBus> dc_buses;
  std::vector<DcBranch> dc_branches;
  std::vector<Converter> converters;
  std::vector<Battery> batteries;
  std::vector<WindFarm> wind_farms;
  ScheduleFactors schedule;

  int ac_bus_index(int id) const;  // -1 when absent
  int dc_bus_index(int id) const;

  // Referential integrity, bound/efficiency invariants, connectivity of the
  // AC and DC graphs. Throws std::invalid_argument with a path-qualified
  // message on the first violation.
  void validate() const;
};

CaseData parse_case(const std::string& path);
CaseData parse_case_text(const std::string& json_text, const std::string& origin = "<string>");
std::string serialize_case(const CaseData& data);

// Copy with all nominal demands scaled; factor must be positive.
CaseData demand_scale(const CaseData& data, double factor);

}  // namespace gridsoc
