// Command-line front end: battery-sizing co-design studies on AC grids with
// an embedded multi-terminal DC network.

#include <CLI11.hpp>

#include "gridsoc/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gridsoc: graph-structured conic co-design of grid battery storage"};
  app.require_subcommand(1);

  gridsoc::RunSpec spec;
  std::vector<double> weights;
  std::vector<double> sizes;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--case", spec.case_path, "case file (JSON)")->required();
    cmd->add_option("--out", spec.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--tol", spec.tolerance, "solver residual tolerance")
        ->capture_default_str();
    cmd->add_option("--max-iter", spec.max_iterations, "solver iteration limit")
        ->capture_default_str();
    cmd->add_flag_callback("--no-svg", [&] { spec.svg = false; }, "skip SVG plots");
    cmd->add_option("--jobs", spec.jobs, "parallel solves (0 = all cores)")
        ->capture_default_str();
  };
  const auto add_weights = [&](CLI::App* cmd) {
    cmd->add_option("--weights", weights, "objective weights w1,w2 (cost, loss)")
        ->delimiter(',')
        ->expected(2);
  };
  const auto add_sizes = [&](CLI::App* cmd) {
    cmd->add_option("--sizes", sizes,
                    "fixed battery sizes in MWh (one value, or one per battery); "
                    "omit for co-design sizing")
        ->delimiter(',');
  };

  CLI::App* solve = app.add_subcommand("solve", "one scalarized co-design solve");
  add_common(solve);
  add_weights(solve);
  add_sizes(solve);

  CLI::App* schedule = app.add_subcommand("schedule", "battery operation table and plot");
  add_common(schedule);
  add_weights(schedule);
  add_sizes(schedule);

  CLI::App* size_sweep = app.add_subcommand("size-sweep", "fixed-size cost curve");
  add_common(size_sweep);
  add_weights(size_sweep);
  size_sweep->add_option("--size-from", spec.size_from, "first size (MWh)")
      ->capture_default_str();
  size_sweep->add_option("--size-to", spec.size_to, "last size (MWh)")->capture_default_str();
  size_sweep->add_option("--size-step", spec.size_step, "size increment (MWh)")
      ->capture_default_str();

  CLI::App* demand = app.add_subcommand("demand-sweep", "cost vs size across demand levels");
  add_common(demand);
  add_weights(demand);
  demand->add_option("--scale-from", spec.scale_from, "first demand scale")
      ->capture_default_str();
  demand->add_option("--scale-to", spec.scale_to, "last demand scale")->capture_default_str();
  demand->add_option("--scale-step", spec.scale_step, "demand scale step")
      ->capture_default_str();
  demand->add_option("--size-from", spec.size_from, "first size (MWh)")->capture_default_str();
  demand->add_option("--size-to", spec.size_to, "last size (MWh)")->capture_default_str();
  demand->add_option("--size-step", spec.size_step, "size increment (MWh)")
      ->capture_default_str();

  CLI::App* grid = app.add_subcommand("pareto-grid", "Pareto front by weight grid");
  add_common(grid);
  add_sizes(grid);
  grid->add_option("--M", spec.pareto_grid, "number of grid weights")->capture_default_str();

  CLI::App* grad = app.add_subcommand("pareto-grad", "Pareto front by projected weight updates");
  add_common(grad);
  add_sizes(grad);
  grad->add_option("--K", spec.pareto_iterations, "weight-update iterations")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  spec.subcommand = app.get_subcommands().front()->get_name();
  if (weights.size() == 2) spec.weights = {weights[0], weights[1]};
  if (!sizes.empty()) spec.sizes = sizes;
  return gridsoc::run(spec);
}
