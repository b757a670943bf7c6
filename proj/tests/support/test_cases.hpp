#pragma once

// Small hand-built systems used across the test suites.

#include <string>

#include "gridsoc/case_data.hpp"

namespace testcases {

inline gridsoc::CaseData case9() {
  return gridsoc::parse_case(std::string(GRIDSOC_CASE_DIR) + "/case9_mtdc.json");
}

// Two AC buses + a small DC spur: generator and converter at bus 1, load and
// battery at bus 2. Three hours with a load/cost swing so the battery has an
// arbitrage incentive.
inline gridsoc::CaseData two_bus() {
  gridsoc::CaseData data;
  data.name = "two_bus";
  data.mva_base = 100.0;
  data.horizon = 3;
  data.ac_buses = {{1, 0.9, 1.1, 0.0, 0.0}, {2, 0.9, 1.1, 0.5, 0.1}};
  data.ac_branches = {{1, 2, 0.01, 0.1, 0.0}};
  data.generators = {{1, 0.0, 2.0, -1.0, 1.0, 10.0, 10.0, 0.1, 5.0, 10.0}};
  data.dc_buses = {{1, 0.9, 1.1}, {2, 0.9, 1.1}};
  data.dc_branches = {{1, 2, 0.01}};
  data.converters = {{1, 2, 0.03, 0.02, 1.0}};
  data.batteries = {{2, 5.0, 20.0, 10.0, 10.0, 0.8, 1.1, 2.5, 2.5, 0.01, 0.001}};
  data.wind_farms = {{1, 20.0}};
  data.schedule.load = {1.0, 1.4, 0.8};
  data.schedule.wind = {1.0, 1.0, 1.0};
  data.schedule.fuel_cost = {1.0, 1.5, 0.9};
  data.validate();
  return data;
}

// Single isolated bus with a must-run generator above load: the 20 MW surplus
// must flow into the two batteries. Battery 0 is cheap to cycle but pinched at
// 20 MWh, battery 1 is huge but expensive to cycle, so the relaxation prefers
// fractional simultaneous charge/discharge on battery 0.
inline gridsoc::CaseData surplus() {
  gridsoc::CaseData data;
  data.name = "surplus";
  data.mva_base = 100.0;
  data.horizon = 2;
  data.ac_buses = {{1, 0.9, 1.1, 0.05, 0.0}};
  data.generators = {{1, 0.25, 0.25, 0.0, 0.0, 10.0, 10.0, 0.0, 0.0, 0.0}};
  data.batteries = {{1, 20.0, 20.0, 100.0, 100.0, 0.8, 1.1, 10.0, 0.0, 0.0, 0.001},
                    {1, 200.0, 200.0, 100.0, 100.0, 0.8, 1.1, 0.0, 0.0, 0.0, 10.0}};
  data.schedule.load = {1.0, 1.0};
  data.schedule.wind = {1.0, 1.0};
  data.schedule.fuel_cost = {1.0, 1.0};
  data.validate();
  return data;
}

// One bus, one free generator, nothing else: the all-zero operating point.
inline gridsoc::CaseData single_bus() {
  gridsoc::CaseData data;
  data.name = "single_bus";
  data.mva_base = 100.0;
  data.horizon = 8;
  data.ac_buses = {{1, 0.9, 1.1, 0.0, 0.0}};
  data.generators = {{1, 0.0, 1.0, -1.0, 1.0, 10.0, 10.0, 0.0, 1.0, 0.0}};
  data.schedule.load.assign(8, 1.0);
  data.schedule.wind.assign(8, 1.0);
  data.schedule.fuel_cost.assign(8, 1.0);
  data.validate();
  return data;
}

}  // namespace testcases
