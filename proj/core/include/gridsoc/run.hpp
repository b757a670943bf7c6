#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace gridsoc {

// One CLI invocation. Subcommands: solve, size-sweep, demand-sweep,
// pareto-grid, pareto-grad, schedule.
struct RunSpec {
  std::string subcommand;
  std::string case_path;
  std::string out_dir = ".";
  std::array<double, 2> weights{1.0, 0.0};
  std::optional<std::vector<double>> sizes;  // fixed battery sizes (MWh)
  int pareto_iterations = 10;                // K
  int pareto_grid = 11;                      // M
  double scale_from = 0.98, scale_to = 1.04, scale_step = 0.01;
  double size_from = 20.0, size_to = 120.0, size_step = 10.0;
  double tolerance = 1e-6;
  int max_iterations = 100000;
  bool svg = true;
  int jobs = 0;  // 0: hardware concurrency
};

// Exit code: 0 success, 1 validation/usage error, 2 solve failure.
int run(const RunSpec& spec);

}  // namespace gridsoc
