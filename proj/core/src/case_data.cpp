#include "gridsoc/case_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridsoc {

using nlohmann::json;

int CaseData::ac_bus_index(int id) const {
  for (std::size_t i = 0; i < ac_buses.size(); ++i) {
    if (ac_buses[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int CaseData::dc_bus_index(int id) const {
  for (std::size_t i = 0; i < dc_buses.size(); ++i) {
    if (dc_buses[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

template <typename Adjacency>
bool connected(int count, const Adjacency& adjacent) {
  if (count <= 1) return true;
  std::vector<bool> seen(count, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int at = frontier.front();
    frontier.pop();
    for (int next : adjacent(at)) {
      if (!seen[next]) {
        seen[next] = true;
        ++reached;
        frontier.push(next);
      }
    }
  }
  return reached == count;
}

}  // namespace

void CaseData::validate() const {
  if (mva_base <= 0) fail("case.mva_base", "must be positive");
  if (horizon < 1) fail("case.horizon", "must be at least 1");
  if (ac_buses.empty()) fail("case.ac_buses", "must not be empty");

  std::set<int> ac_ids;
  for (std::size_t i = 0; i < ac_buses.size(); ++i) {
    const auto where = "case.ac_buses[" + std::to_string(i) + "]";
    const AcBus& bus = ac_buses[i];
    if (!ac_ids.insert(bus.id).second) fail(where, "duplicate bus id " + std::to_string(bus.id));
    if (!(bus.vmin > 0.0) || !(bus.vmin <= bus.vmax)) {
      fail(where, "voltage bounds must satisfy 0 < vmin <= vmax");
    }
  }
  std::set<int> dc_ids;
  for (std::size_t i = 0; i < dc_buses.size(); ++i) {
    const auto where = "case.dc_buses[" + std::to_string(i) + "]";
    const DcBus& bus = dc_buses[i];
    if (!dc_ids.insert(bus.id).second) fail(where, "duplicate bus id " + std::to_string(bus.id));
    if (!(bus.vmin > 0.0) || !(bus.vmin <= bus.vmax)) {
      fail(where, "voltage bounds must satisfy 0 < vmin <= vmax");
    }
  }

  for (std::size_t i = 0; i < ac_branches.size(); ++i) {
    const auto where = "case.ac_branches[" + std::to_string(i) + "]";
    const AcBranch& br = ac_branches[i];
    if (br.from == br.to) fail(where, "self-loop branch");
    if (ac_bus_index(br.from) < 0) fail(where, "unknown from-bus " + std::to_string(br.from));
    if (ac_bus_index(br.to) < 0) fail(where, "unknown to-bus " + std::to_string(br.to));
    if (br.r < 0.0) fail(where, "negative series resistance");
    if (br.r == 0.0 && br.x == 0.0) fail(where, "zero series impedance");
  }
  for (std::size_t i = 0; i < dc_branches.size(); ++i) {
    const auto where = "case.dc_branches[" + std::to_string(i) + "]";
    const DcBranch& br = dc_branches[i];
    if (br.from == br.to) fail(where, "self-loop branch");
    if (dc_bus_index(br.from) < 0) fail(where, "unknown from-bus " + std::to_string(br.from));
    if (dc_bus_index(br.to) < 0) fail(where, "unknown to-bus " + std::to_string(br.to));
    if (!(br.resistance > 0.0)) fail(where, "resistance must be positive");
  }

  for (std::size_t i = 0; i < generators.size(); ++i) {
    const auto where = "case.generators[" + std::to_string(i) + "]";
    const Generator& gen = generators[i];
    if (ac_bus_index(gen.bus) < 0) fail(where, "unknown bus " + std::to_string(gen.bus));
    if (gen.pmin > gen.pmax) fail(where, "pmin above pmax");
    if (gen.qmin > gen.qmax) fail(where, "qmin above qmax");
    if (gen.ramp_p < 0.0 || gen.ramp_q < 0.0) fail(where, "negative ramp limit");
    if (gen.cost_a < 0.0) fail(where, "negative quadratic cost coefficient");
  }

  for (std::size_t i = 0; i < converters.size(); ++i) {
    const auto where = "case.converters[" + std::to_string(i) + "]";
    const Converter& conv = converters[i];
    if (ac_bus_index(conv.ac_bus) < 0) fail(where, "unknown AC bus " + std::to_string(conv.ac_bus));
    if (dc_bus_index(conv.dc_bus) < 0) fail(where, "unknown DC bus " + std::to_string(conv.dc_bus));
    if (conv.beta < 0.0 || conv.beta >= 1.0) fail(where, "beta must lie in [0, 1)");
    if (conv.k == 0.0) fail(where, "droop gain k must be nonzero");
  }

  for (std::size_t i = 0; i < batteries.size(); ++i) {
    const auto where = "case.batteries[" + std::to_string(i) + "]";
    const Battery& bat = batteries[i];
    if (ac_bus_index(bat.ac_bus) < 0) fail(where, "unknown bus " + std::to_string(bat.ac_bus));
    if (!(0.0 <= bat.bs_min && bat.bs_min <= bat.bs_max)) {
      fail(where, "size bounds must satisfy 0 <= bs_min <= bs_max");
    }
    if (!(bat.eta_charge > 0.0 && bat.eta_charge <= 1.0)) {
      fail(where + ".eta_charge", "must lie in (0, 1]");
    }
    if (!(bat.eta_discharge >= 1.0)) fail(where + ".eta_discharge", "must be >= 1");
    if (bat.p_charge_max < 0.0 || bat.p_discharge_max < 0.0) fail(where, "negative rate limit");
    if (bat.soc_initial < 0.0 || bat.soc_initial > bat.bs_min) {
      fail(where + ".soc_initial", "must lie in [0, bs_min]");
    }
    if (bat.soc_terminal_min < 0.0) fail(where + ".soc_terminal_min", "must be nonnegative");
    if (bat.install_rate < 0.0 || bat.operation_rate < 0.0) fail(where, "negative cost rate");
  }

  for (std::size_t i = 0; i < wind_farms.size(); ++i) {
    const auto where = "case.wind_farms[" + std::to_string(i) + "]";
    const WindFarm& wf = wind_farms[i];
    if (dc_bus_index(wf.dc_bus) < 0) fail(where, "unknown DC bus " + std::to_string(wf.dc_bus));
    if (wf.nominal_mw < 0.0) fail(where, "negative nominal output");
  }

  const auto check_factors = [&](const std::vector<double>& f, const char* label) {
    if (static_cast<int>(f.size()) != horizon) {
      fail(std::string("case.schedule.") + label,
           "length " + std::to_string(f.size()) + " does not match horizon " +
               std::to_string(horizon));
    }
    for (double v : f) {
      if (!(v > 0.0)) fail(std::string("case.schedule.") + label, "factors must be positive");
    }
  };
  check_factors(schedule.load, "load");
  check_factors(schedule.wind, "wind");
  check_factors(schedule.fuel_cost, "fuel_cost");

  // Connectivity.
  {
    std::vector<std::vector<int>> adj(ac_buses.size());
    for (const AcBranch& br : ac_branches) {
      const int a = ac_bus_index(br.from), b = ac_bus_index(br.to);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    if (!connected(static_cast<int>(ac_buses.size()), [&](int i) { return adj[i]; })) {
      fail("case.ac_branches", "AC grid is not connected");
    }
  }
  if (!dc_buses.empty()) {
    std::vector<std::vector<int>> adj(dc_buses.size());
    for (const DcBranch& br : dc_branches) {
      const int a = dc_bus_index(br.from), b = dc_bus_index(br.to);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    if (!connected(static_cast<int>(dc_buses.size()), [&](int i) { return adj[i]; })) {
      fail("case.dc_branches", "DC grid is not connected");
    }
  }
}

namespace {

double require_number(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) fail(where, "missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

int require_int(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) fail(where, "missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

double optional_number(const json& obj, const std::string& where, const std::string& key,
                       double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) fail(where, "unknown field '" + key + "'");
  }
}

std::vector<double> require_array(const json& obj, const std::string& where,
                                  const std::string& key) {
  if (!obj.contains(key)) fail(where, "missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_array()) fail(where + "." + key, "expected an array");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) fail(where + "." + key, "expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

CaseData parse_case_text(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    fail(origin, std::string("JSON parse error: ") + err.what());
  }
  if (!root.is_object()) fail(origin, "top level must be an object");
  reject_unknown(root, origin,
                 {"name", "mva_base", "horizon", "ac_buses", "ac_branches", "generators",
                  "dc_buses", "dc_branches", "converters", "batteries", "wind_farms", "schedule",
                  "costs"});

  CaseData out;
  out.name = root.value("name", "");
  out.mva_base = require_number(root, origin, "mva_base");
  out.horizon = require_int(root, origin, "horizon");

  double default_install = 0.0, default_operation = 0.0;
  if (root.contains("costs")) {
    const json& costs = root.at("costs");
    const std::string where = origin + ".costs";
    reject_unknown(costs, where, {"battery_install_rate", "battery_operation_rate"});
    default_install = optional_number(costs, where, "battery_install_rate", 0.0);
    default_operation = optional_number(costs, where, "battery_operation_rate", 0.0);
  }

  const auto section = [&](const char* key) -> const json& {
    static const json empty = json::array();
    if (!root.contains(key)) return empty;
    const json& v = root.at(key);
    if (!v.is_array()) fail(origin + "." + key, "expected an array");
    return v;
  };

  {
    if (!root.contains("ac_buses")) fail(origin, "missing field 'ac_buses'");
    int i = 0;
    for (const json& e : section("ac_buses")) {
      const std::string where = origin + ".ac_buses[" + std::to_string(i++) + "]";
      reject_unknown(e, where, {"id", "vmin", "vmax", "pd", "qd"});
      AcBus bus;
      bus.id = require_int(e, where, "id");
      bus.vmin = require_number(e, where, "vmin");
      bus.vmax = require_number(e, where, "vmax");
      bus.pd = require_number(e, where, "pd");
      bus.qd = require_number(e, where, "qd");
      out.ac_buses.push_back(bus);
    }
  }
  {
    int i = 0;
    for (const json& e : section("ac_branches")) {
      const std::string where = origin + ".ac_branches[" + std::to_string(i++) + "]";
      reject_unknown(e, where, {"from", "to", "r", "x", "charging"});
      AcBranch br;
      br.from = require_int(e, where, "from");
      br.to = require_int(e, where, "to");
      br.r = require_number(e, where, "r");
      br.x = require_number(e, where, "x");
      br.charging = optional_number(e, where, "charging", 0.0);
      out.ac_branches.push_back(br);
    }
  }
  {
    int i = 0;
    for (const json& e : section("generators")) {
      const std::string where = origin + ".generators[" + std::to_string(i++) + "]";
      reject_unknown(e, where,
                     {"bus", "pmin", "pmax", "qmin", "qmax", "ramp_p", "ramp_q", "cost_a",
                      "cost_b", "cost_c"});
      Generator gen;
      gen.bus = require_int(e, where, "bus");
      gen.pmin = require_number(e, where, "pmin");
      gen.pmax = require_number(e, where, "pmax");
      gen.qmin = require_number(e, where, "qmin");
      gen.qmax = require_number(e, where, "qmax");
      gen.ramp_p = require_number(e, where, "ramp_p");
      gen.ramp_q = require_number(e, where, "ramp_q");
      gen.cost_a = require_number(e, where, "cost_a");
      gen.cost_b = require_number(e, where, "cost_b");
      gen.cost_c = require_number(e, where, "cost_c");
      out.generators.push_back(gen);
    }
  }
  {
    int i = 0;
    for (const json& e : section("dc_buses")) {
      const std::string where = origin + ".dc_buses[" + std::to_string(i++) + "]";
      reject_unknown(e, where, {"id", "vmin", "vmax"});
      DcBus bus;
      bus.id = require_int(e, where, "id");
      bus.vmin = require_number(e, where, "vmin");
      bus.vmax = require_number(e, where, "vmax");
      out.dc_buses.push_back(bus);
    }
  }
  {
    int i = 0;
    for (const json& e : section("dc_branches")) {
      const std::string where = origin + ".dc_branches[" + std::to_string(i++) + "]";
      reject_unknown(e, where, {"from", "to", "r"});
      DcBranch br;
      br.from = require_int(e, where, "from");
      br.to = require_int(e, where, "to");
      br.resistance = require_number(e, where, "r");
      out.dc_branches.push_back(br);
    }
  }
  {
    int i = 0;
    for (const json& e : section("converters")) {
      const std::string where = origin + ".converters[" + std::to_string(i++) + "]";
      reject_unknown(e, where, {"ac_bus", "dc_bus", "beta", "k", "d"});
      Converter conv;
      conv.ac_bus = require_int(e, where, "ac_bus");
      conv.dc_bus = require_int(e, where, "dc_bus");
      conv.beta = require_number(e, where, "beta");
      conv.k = require_number(e, where, "k");
      conv.d = require_number(e, where, "d");
      out.converters.push_back(conv);
    }
  }
  {
    int i = 0;
    for (const json& e : section("batteries")) {
      const std::string where = origin + ".batteries[" + std::to_string(i++) + "]";
      reject_unknown(e, where,
                     {"ac_bus", "bs_min", "bs_max", "p_charge_max", "p_discharge_max",
                      "eta_charge", "eta_discharge", "soc_initial", "soc_terminal_min",
                      "install_rate", "operation_rate"});
      Battery bat;
      bat.ac_bus = require_int(e, where, "ac_bus");
      bat.bs_min = require_number(e, where, "bs_min");
      bat.bs_max = require_number(e, where, "bs_max");
      bat.p_charge_max = require_number(e, where, "p_charge_max");
      bat.p_discharge_max = require_number(e, where, "p_discharge_max");
      bat.eta_charge = require_number(e, where, "eta_charge");
      bat.eta_discharge = require_number(e, where, "eta_discharge");
      bat.soc_initial = require_number(e, where, "soc_initial");
      bat.soc_terminal_min = require_number(e, where, "soc_terminal_min");
      bat.install_rate = optional_number(e, where, "install_rate", default_install);
      bat.operation_rate = optional_number(e, where, "operation_rate", default_operation);
      out.batteries.push_back(bat);
    }
  }
  {
    int i = 0;
    for (const json& e : section("wind_farms")) {
      const std::string where = origin + ".wind_farms[" + std::to_string(i++) + "]";
      reject_unknown(e, where, {"dc_bus", "nominal_mw"});
      WindFarm wf;
      wf.dc_bus = require_int(e, where, "dc_bus");
      wf.nominal_mw = require_number(e, where, "nominal_mw");
      out.wind_farms.push_back(wf);
    }
  }
  {
    if (!root.contains("schedule")) fail(origin, "missing field 'schedule'");
    const json& sched = root.at("schedule");
    const std::string where = origin + ".schedule";
    reject_unknown(sched, where, {"load", "wind", "fuel_cost"});
    out.schedule.load = require_array(sched, where, "load");
    out.schedule.wind = require_array(sched, where, "wind");
    out.schedule.fuel_cost = require_array(sched, where, "fuel_cost");
  }

  out.validate();
  return out;
}

CaseData parse_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("parse_case: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_case_text(buffer.str(), path);
}

std::string serialize_case(const CaseData& data) {
  json root;
  if (!data.name.empty()) root["name"] = data.name;
  root["mva_base"] = data.mva_base;
  root["horizon"] = data.horizon;
  root["ac_buses"] = json::array();
  for (const AcBus& bus : data.ac_buses) {
    root["ac_buses"].push_back(
        {{"id", bus.id}, {"vmin", bus.vmin}, {"vmax", bus.vmax}, {"pd", bus.pd}, {"qd", bus.qd}});
  }
  root["ac_branches"] = json::array();
  for (const AcBranch& br : data.ac_branches) {
    root["ac_branches"].push_back(
        {{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x}, {"charging", br.charging}});
  }
  root["generators"] = json::array();
  for (const Generator& gen : data.generators) {
    root["generators"].push_back({{"bus", gen.bus},
                                  {"pmin", gen.pmin},
                                  {"pmax", gen.pmax},
                                  {"qmin", gen.qmin},
                                  {"qmax", gen.qmax},
                                  {"ramp_p", gen.ramp_p},
                                  {"ramp_q", gen.ramp_q},
                                  {"cost_a", gen.cost_a},
                                  {"cost_b", gen.cost_b},
                                  {"cost_c", gen.cost_c}});
  }
  root["dc_buses"] = json::array();
  for (const DcBus& bus : data.dc_buses) {
    root["dc_buses"].push_back({{"id", bus.id}, {"vmin", bus.vmin}, {"vmax", bus.vmax}});
  }
  root["dc_branches"] = json::array();
  for (const DcBranch& br : data.dc_branches) {
    root["dc_branches"].push_back({{"from", br.from}, {"to", br.to}, {"r", br.resistance}});
  }
  root["converters"] = json::array();
  for (const Converter& conv : data.converters) {
    root["converters"].push_back({{"ac_bus", conv.ac_bus},
                                  {"dc_bus", conv.dc_bus},
                                  {"beta", conv.beta},
                                  {"k", conv.k},
                                  {"d", conv.d}});
  }
  root["batteries"] = json::array();
  for (const Battery& bat : data.batteries) {
    root["batteries"].push_back({{"ac_bus", bat.ac_bus},
                                 {"bs_min", bat.bs_min},
                                 {"bs_max", bat.bs_max},
                                 {"p_charge_max", bat.p_charge_max},
                                 {"p_discharge_max", bat.p_discharge_max},
                                 {"eta_charge", bat.eta_charge},
                                 {"eta_discharge", bat.eta_discharge},
                                 {"soc_initial", bat.soc_initial},
                                 {"soc_terminal_min", bat.soc_terminal_min},
                                 {"install_rate", bat.install_rate},
                                 {"operation_rate", bat.operation_rate}});
  }
  root["wind_farms"] = json::array();
  for (const WindFarm& wf : data.wind_farms) {
    root["wind_farms"].push_back({{"dc_bus", wf.dc_bus}, {"nominal_mw", wf.nominal_mw}});
  }
  root["schedule"] = {{"load", data.schedule.load},
                      {"wind", data.schedule.wind},
                      {"fuel_cost", data.schedule.fuel_cost}};
  return root.dump(2);
}

CaseData demand_scale(const CaseData& data, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("demand_scale: factor must be positive");
  CaseData out = data;
  for (AcBus& bus : out.ac_buses) {
    bus.pd *= factor;
    bus.qd *= factor;
  }
  return out;
}

}  // namespace gridsoc
