#include "gridsoc/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "gridsoc/parallel.hpp"
#include "gridsoc/pareto.hpp"
#include "gridsoc/report.hpp"

#ifndef GRIDSOC_BUILD_ID
#define GRIDSOC_BUILD_ID "unknown"
#endif

namespace gridsoc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunContext {
  RunSpec spec;
  CaseData data;
  fs::path out;
  BnbConfig bnb;
  json manifest;
  std::vector<std::string> failures;

  fs::path path(const std::string& name) const { return out / name; }
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(RunContext& ctx, const std::string& status) {
  ctx.manifest["status"] = status;
  ctx.manifest["finished"] = timestamp();
  if (!ctx.failures.empty()) ctx.manifest["failures"] = ctx.failures;
  std::ofstream out(ctx.path("manifest.json"));
  out << ctx.manifest.dump(2) << "\n";
}

SizingSpec sizing_from(const RunContext& ctx) {
  if (!ctx.spec.sizes) return SizingSpec::codesign();
  std::vector<double> sizes = *ctx.spec.sizes;
  if (sizes.size() == 1 && ctx.data.batteries.size() > 1) {
    sizes.assign(ctx.data.batteries.size(), sizes[0]);
  }
  return SizingSpec::fixed(std::move(sizes));
}

Table solution_table(const CaseData& data, const OperatingSolution& sol) {
  Table table;
  table.columns = {"hour", "component", "id", "quantity", "value"};
  const auto row = [&](int t, const std::string& kind, const std::string& id,
                       const std::string& what, double value) {
    table.add_row({fmt_int(t + 1), kind, id, what, fmt_real(value)});
  };
  for (int t = 0; t < sol.horizon; ++t) {
    for (std::size_t i = 0; i < data.ac_buses.size(); ++i) {
      row(t, "ac_bus", std::to_string(data.ac_buses[i].id), "c_ii", sol.c_diag[t][i]);
    }
    for (std::size_t g = 0; g < data.generators.size(); ++g) {
      const std::string id = std::to_string(data.generators[g].bus);
      row(t, "generator", id, "p_pu", sol.gen_p[t][g]);
      row(t, "generator", id, "q_pu", sol.gen_q[t][g]);
    }
    for (std::size_t e = 0; e < data.ac_branches.size(); ++e) {
      const auto& br = data.ac_branches[e];
      const std::string id = std::to_string(br.from) + "-" + std::to_string(br.to);
      row(t, "ac_branch", id, "c_ij", sol.c_off[t][e]);
      row(t, "ac_branch", id, "s_ij", sol.s_off[t][e]);
    }
    for (std::size_t i = 0; i < data.dc_buses.size(); ++i) {
      row(t, "dc_bus", std::to_string(data.dc_buses[i].id), "v_ii", sol.v_diag[t][i]);
    }
    for (std::size_t e = 0; e < data.dc_branches.size(); ++e) {
      const auto& br = data.dc_branches[e];
      const std::string id = std::to_string(br.from) + "-" + std::to_string(br.to);
      row(t, "dc_branch", id, "v_ij", sol.v_off[t][e]);
    }
    for (std::size_t c = 0; c < data.converters.size(); ++c) {
      const std::string id = std::to_string(data.converters[c].ac_bus);
      row(t, "converter", id, "p_ac_pu", sol.conv_p_ac[t][c]);
      row(t, "converter", id, "p_loss_pu", sol.conv_loss[t][c]);
      row(t, "converter", id, "p_dc_pu", sol.conv_p_dc[t][c]);
    }
    for (std::size_t s = 0; s < data.batteries.size(); ++s) {
      const std::string id = std::to_string(s);
      row(t, "battery", id, "charge_mw", sol.charge_mw[t][s]);
      row(t, "battery", id, "discharge_mw", sol.discharge_mw[t][s]);
      row(t, "battery", id, "soc_mwh", sol.soc_mwh[t][s]);
      row(t, "battery", id, "indicator", sol.indicator[t][s]);
    }
  }
  return table;
}

void write_schedule_outputs(RunContext& ctx, const OperatingSolution& sol) {
  const auto schedule = battery_schedule(sol);
  Table table;
  table.columns = {"battery", "hour", "net_power_mw", "soc_mwh"};
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    for (const BatteryScheduleRow& entry : schedule[s]) {
      table.add_row({fmt_int(static_cast<long long>(s)), fmt_int(entry.hour),
                     fmt_real(entry.net_mw), fmt_real(entry.soc_mwh)});
    }
  }
  emit_csv(table, ctx.path("schedule.csv").string());

  if (ctx.spec.svg && !schedule.empty()) {
    std::vector<PlotSpec> panes;
    for (std::size_t s = 0; s < schedule.size(); ++s) {
      PlotSpec pane;
      pane.title = "battery " + std::to_string(s) + " at bus " +
                   std::to_string(ctx.data.batteries[s].ac_bus);
      pane.xlabel = "hour";
      pane.ylabel = "MW / MWh";
      PlotSeries net;
      net.label = "net power (MW)";
      net.style = PlotSeries::Style::Bars;
      PlotSeries soc;
      soc.label = "state of charge (MWh)";
      soc.style = PlotSeries::Style::Line;
      for (const BatteryScheduleRow& entry : schedule[s]) {
        net.x.push_back(entry.hour);
        net.y.push_back(entry.net_mw);
        soc.x.push_back(entry.hour);
        soc.y.push_back(entry.soc_mwh);
      }
      pane.series = {net, soc};
      panes.push_back(std::move(pane));
    }
    emit_svg_panes(panes, ctx.path("schedule.svg").string());
  }
}

void write_exactness(RunContext& ctx, const OperatingSolution& sol) {
  const auto [profile, report] = recover_voltages(ctx.data, sol);
  Table table;
  table.columns = {"hour", "network", "branch", "cone_gap", "cycle_mismatch"};
  for (int t = 0; t < sol.horizon; ++t) {
    for (std::size_t e = 0; e < ctx.data.ac_branches.size(); ++e) {
      const auto& br = ctx.data.ac_branches[e];
      table.add_row({fmt_int(t + 1), "ac",
                     std::to_string(br.from) + "-" + std::to_string(br.to),
                     fmt_real(report.ac_gap[t][e]), fmt_real(report.cycle_mismatch[t][e])});
    }
    for (std::size_t e = 0; e < ctx.data.dc_branches.size(); ++e) {
      const auto& br = ctx.data.dc_branches[e];
      table.add_row({fmt_int(t + 1), "dc",
                     std::to_string(br.from) + "-" + std::to_string(br.to),
                     fmt_real(report.dc_gap[t][e]), "0"});
    }
  }
  emit_csv(table, ctx.path("exactness.csv").string());
  ctx.manifest["exactness"] = {{"max_ac_gap", report.max_ac_gap},
                               {"max_dc_gap", report.max_dc_gap},
                               {"max_cycle_mismatch", report.max_cycle_mismatch},
                               {"flagged", report.flagged},
                               {"threshold", report.threshold}};
}

json point_json(const ParetoPoint& point) {
  return {{"w1", point.weights[0]},
          {"w2", point.weights[1]},
          {"cost", point.cost},
          {"loss_mwh", point.loss},
          {"sizes_mwh", point.sizes_mwh}};
}

int run_solve(RunContext& ctx, bool schedule_only) {
  const SizingSpec sizing = sizing_from(ctx);
  ParetoPoint point = scalarized_solve(ctx.data, ctx.spec.weights, sizing, ctx.bnb);
  const OperatingSolution& sol = *point.solution;

  Table summary;
  summary.columns = {"quantity", "value"};
  summary.add_row({"total_cost", fmt_real(point.cost)});
  summary.add_row({"total_loss_mwh", fmt_real(point.loss)});
  summary.add_row({"scalarized_objective", fmt_real(sol.scalarized_objective)});
  summary.add_row({"w1", fmt_real(point.weights[0])});
  summary.add_row({"w2", fmt_real(point.weights[1])});
  for (std::size_t s = 0; s < point.sizes_mwh.size(); ++s) {
    summary.add_row({"battery_" + std::to_string(s) + "_size_mwh",
                     fmt_real(point.sizes_mwh[s])});
  }
  const PhysicsReport physics = check_physics(ctx.data, sol);
  summary.add_row({"max_p_balance_residual", fmt_real(physics.max_p_balance)});
  summary.add_row({"max_q_balance_residual", fmt_real(physics.max_q_balance)});
  summary.add_row({"max_dc_balance_residual", fmt_real(physics.max_dc_balance)});
  summary.add_row({"max_loss_gap", fmt_real(physics.max_loss_gap)});
  summary.add_row({"max_exclusivity", fmt_real(physics.max_exclusivity)});
  emit_csv(summary, ctx.path("summary.csv").string());

  if (!schedule_only) {
    emit_csv(solution_table(ctx.data, sol), ctx.path("solution.csv").string());
    write_exactness(ctx, sol);
  }
  write_schedule_outputs(ctx, sol);

  ctx.manifest["result"] = point_json(point);
  ctx.manifest["physics"] = {{"max_p_balance", physics.max_p_balance},
                             {"max_q_balance", physics.max_q_balance},
                             {"max_dc_balance", physics.max_dc_balance},
                             {"max_converter_balance", physics.max_converter_balance},
                             {"max_loss_gap", physics.max_loss_gap},
                             {"max_soc_violation", physics.max_soc_violation},
                             {"max_exclusivity", physics.max_exclusivity}};
  return 0;
}

std::vector<double> arange(double from, double to, double step) {
  std::vector<double> out;
  for (double v = from; v <= to + 1e-9; v += step) out.push_back(v);
  return out;
}

int run_size_sweep(RunContext& ctx) {
  const std::vector<double> sizes = arange(ctx.spec.size_from, ctx.spec.size_to,
                                           ctx.spec.size_step);
  const int jobs = ctx.spec.jobs > 0 ? ctx.spec.jobs : hardware_jobs();
  std::vector<std::optional<ParetoPoint>> points(sizes.size());
  std::vector<std::string> errors(sizes.size());
  parallel_for(static_cast<int>(sizes.size()), jobs, [&](int i) {
    try {
      std::vector<double> fixed(ctx.data.batteries.size(), sizes[i]);
      points[i] = scalarized_solve(ctx.data, ctx.spec.weights,
                                   SizingSpec::fixed(std::move(fixed)), ctx.bnb);
    } catch (const std::exception& err) {
      errors[i] = err.what();
    }
  });

  Table table;
  table.columns = {"size_mwh", "total_cost", "total_loss_mwh"};
  PlotSeries curve;
  curve.label = "minimum total cost";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!points[i]) {
      ctx.failures.push_back("size " + fmt_real(sizes[i]) + ": " + errors[i]);
      continue;
    }
    table.add_row({fmt_real(sizes[i]), fmt_real(points[i]->cost), fmt_real(points[i]->loss)});
    curve.x.push_back(sizes[i]);
    curve.y.push_back(points[i]->cost);
  }
  emit_csv(table, ctx.path("size_sweep.csv").string());
  if (ctx.spec.svg && !curve.x.empty()) {
    PlotSpec plot;
    plot.title = "minimum total cost vs fixed battery size";
    plot.xlabel = "battery size (MWh)";
    plot.ylabel = "total cost";
    plot.series = {curve};
    emit_svg(plot, ctx.path("size_sweep.svg").string());
  }
  return ctx.failures.empty() ? 0 : 2;
}

int run_demand_sweep(RunContext& ctx) {
  const std::vector<double> scales = arange(ctx.spec.scale_from, ctx.spec.scale_to,
                                            ctx.spec.scale_step);
  const std::vector<double> sizes = arange(ctx.spec.size_from, ctx.spec.size_to,
                                           ctx.spec.size_step);
  const int jobs = ctx.spec.jobs > 0 ? ctx.spec.jobs : hardware_jobs();
  const int total = static_cast<int>(scales.size() * sizes.size());
  std::vector<std::optional<ParetoPoint>> points(total);
  std::vector<std::string> errors(total);
  parallel_for(total, jobs, [&](int idx) {
    const double scale = scales[idx / sizes.size()];
    const double size = sizes[idx % sizes.size()];
    try {
      const CaseData scaled = demand_scale(ctx.data, scale);
      std::vector<double> fixed(scaled.batteries.size(), size);
      points[idx] = scalarized_solve(scaled, ctx.spec.weights,
                                     SizingSpec::fixed(std::move(fixed)), ctx.bnb);
    } catch (const std::exception& err) {
      errors[idx] = err.what();
    }
  });

  Table table;
  table.columns = {"scale", "size_mwh", "total_cost"};
  Table best;
  best.columns = {"scale", "best_size_mwh", "total_cost"};
  PlotSpec plot;
  plot.title = "total cost vs battery size across demand levels";
  plot.xlabel = "battery size (MWh)";
  plot.ylabel = "total cost";
  for (std::size_t si = 0; si < scales.size(); ++si) {
    char label[32];
    std::snprintf(label, sizeof label, "scale %.2f", scales[si]);
    PlotSeries series;
    series.label = label;
    double best_cost = std::numeric_limits<double>::infinity();
    double best_size = 0.0;
    for (std::size_t zi = 0; zi < sizes.size(); ++zi) {
      const int idx = static_cast<int>(si * sizes.size() + zi);
      if (!points[idx]) {
        ctx.failures.push_back("scale " + fmt_real(scales[si]) + " size " +
                               fmt_real(sizes[zi]) + ": " + errors[idx]);
        continue;
      }
      table.add_row({fmt_real(scales[si]), fmt_real(sizes[zi]), fmt_real(points[idx]->cost)});
      series.x.push_back(sizes[zi]);
      series.y.push_back(points[idx]->cost);
      if (points[idx]->cost < best_cost) {
        best_cost = points[idx]->cost;
        best_size = sizes[zi];
      }
    }
    if (!series.x.empty()) {
      best.add_row({fmt_real(scales[si]), fmt_real(best_size), fmt_real(best_cost)});
      plot.series.push_back(std::move(series));
    }
  }
  emit_csv(table, ctx.path("demand_sweep.csv").string());
  emit_csv(best, ctx.path("demand_best_size.csv").string());
  if (ctx.spec.svg && !plot.series.empty()) {
    emit_svg(plot, ctx.path("demand_sweep.svg").string());
  }
  return ctx.failures.empty() ? 0 : 2;
}

Table front_table(const std::vector<ParetoPoint>& points) {
  Table table;
  std::vector<std::string> cols = {"w1", "w2", "total_cost", "total_loss_mwh"};
  const std::size_t nbat = points.empty() ? 0 : points.front().sizes_mwh.size();
  for (std::size_t s = 0; s < nbat; ++s) cols.push_back("bs" + std::to_string(s) + "_mwh");
  table.columns = cols;
  for (const ParetoPoint& p : points) {
    std::vector<std::string> row = {fmt_real(p.weights[0]), fmt_real(p.weights[1]),
                                    fmt_real(p.cost), fmt_real(p.loss)};
    for (double s : p.sizes_mwh) row.push_back(fmt_real(s));
    table.add_row(std::move(row));
  }
  return table;
}

void write_front_svg(RunContext& ctx, const std::vector<ParetoPoint>& all,
                     const std::vector<ParetoPoint>& front, const std::string& name) {
  PlotSpec plot;
  plot.title = "Pareto front: cost vs loss";
  plot.xlabel = "total cost";
  plot.ylabel = "total loss (MWh)";
  PlotSeries cloud;
  cloud.label = "solved points";
  cloud.style = PlotSeries::Style::Scatter;
  for (const ParetoPoint& p : all) {
    cloud.x.push_back(p.cost);
    cloud.y.push_back(p.loss);
  }
  PlotSeries line;
  line.label = "non-dominated front";
  for (const ParetoPoint& p : front) {
    line.x.push_back(p.cost);
    line.y.push_back(p.loss);
  }
  plot.series = {cloud, line};
  emit_svg(plot, ctx.path(name).string());
}

int run_pareto_grid(RunContext& ctx) {
  const int jobs = ctx.spec.jobs > 0 ? ctx.spec.jobs : hardware_jobs();
  GridSweepResult sweep =
      grid_sweep(ctx.data, ctx.spec.pareto_grid, sizing_from(ctx), ctx.bnb, jobs);
  ctx.failures = sweep.failures;
  emit_csv(front_table(sweep.points), ctx.path("pareto_points.csv").string());
  const auto front = nondominated_filter(sweep.points);
  emit_csv(front_table(front), ctx.path("pareto_front.csv").string());
  if (ctx.spec.svg && !sweep.points.empty()) {
    write_front_svg(ctx, sweep.points, front, "pareto_front.svg");
  }
  if (sweep.points.empty()) return 2;
  return ctx.failures.empty() ? 0 : 2;
}

int run_pareto_grad(RunContext& ctx) {
  SweepConfig config;
  config.iterations = ctx.spec.pareto_iterations;
  config.bnb = ctx.bnb;
  GradientSweepResult sweep = gradient_sweep(ctx.data, config, sizing_from(ctx));
  ctx.failures = sweep.failures;

  Table trajectory;
  trajectory.columns = {"k", "w1", "w2", "total_cost", "total_loss_mwh"};
  for (std::size_t k = 0; k < sweep.trajectory.size(); ++k) {
    std::string cost = "", loss = "";
    if (k < sweep.points.size()) {
      cost = fmt_real(sweep.points[k].cost);
      loss = fmt_real(sweep.points[k].loss);
    }
    trajectory.add_row({fmt_int(static_cast<long long>(k)), fmt_real(sweep.trajectory[k][0]),
                        fmt_real(sweep.trajectory[k][1]), cost, loss});
  }
  emit_csv(trajectory, ctx.path("pareto_trajectory.csv").string());

  const auto front = nondominated_filter(sweep.points);
  emit_csv(front_table(front), ctx.path("pareto_front.csv").string());
  if (ctx.spec.svg && !sweep.points.empty()) {
    write_front_svg(ctx, sweep.points, front, "pareto_front.svg");
  }
  if (sweep.points.empty()) return 2;
  return ctx.failures.empty() ? 0 : 2;
}

}  // namespace

int run(const RunSpec& spec) {
  RunContext ctx;
  ctx.spec = spec;
  try {
    if (spec.subcommand.empty()) throw std::invalid_argument("run: missing subcommand");
    if (spec.case_path.empty()) throw std::invalid_argument("run: missing --case");
    ctx.out = spec.out_dir;
    fs::create_directories(ctx.out);
    ctx.data = parse_case(spec.case_path);
    ctx.bnb.solver.primal_tol = spec.tolerance;
    ctx.bnb.solver.dual_tol = spec.tolerance;
    ctx.bnb.solver.gap_tol = spec.tolerance;
    ctx.bnb.solver.max_iterations = spec.max_iterations;

    ctx.manifest = {{"subcommand", spec.subcommand},
                    {"case", spec.case_path},
                    {"case_name", ctx.data.name},
                    {"out_dir", spec.out_dir},
                    {"weights", {spec.weights[0], spec.weights[1]}},
                    {"solver",
                     {{"tolerance", spec.tolerance},
                      {"max_iterations", spec.max_iterations},
                      {"bnb_gap_tol", ctx.bnb.gap_tol},
                      {"bnb_node_limit", ctx.bnb.node_limit}}},
                    {"build", GRIDSOC_BUILD_ID},
                    {"started", timestamp()}};
    if (spec.sizes) ctx.manifest["sizes"] = *spec.sizes;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }

  int code = 0;
  try {
    if (spec.subcommand == "solve") {
      code = run_solve(ctx, false);
    } else if (spec.subcommand == "schedule") {
      code = run_solve(ctx, true);
    } else if (spec.subcommand == "size-sweep") {
      code = run_size_sweep(ctx);
    } else if (spec.subcommand == "demand-sweep") {
      code = run_demand_sweep(ctx);
    } else if (spec.subcommand == "pareto-grid") {
      code = run_pareto_grid(ctx);
    } else if (spec.subcommand == "pareto-grad") {
      code = run_pareto_grad(ctx);
    } else {
      std::cerr << "error: unknown subcommand '" << spec.subcommand << "'\n";
      return 1;
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    ctx.failures.push_back(err.what());
    write_manifest(ctx, "validation-error");
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "solve failure: " << err.what() << "\n";
    ctx.failures.push_back(err.what());
    write_manifest(ctx, "solve-failure");
    return 2;
  }
  write_manifest(ctx, code == 0 ? "ok" : "partial-failure");
  return code;
}

}  // namespace gridsoc
