#include "gridsoc/pareto.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gridsoc/cones.hpp"
#include "gridsoc/parallel.hpp"

namespace gridsoc {

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  if (count <= 0) return;
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int hardware_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

namespace {

std::array<double, 2> snap_to_simplex(std::array<double, 2> w) {
  const auto projected = project_simplex(std::span<const double>(w.data(), 2));
  return {projected[0], projected[1]};
}

std::string describe_weights(std::array<double, 2> w) {
  std::ostringstream out;
  out << "w=(" << w[0] << ", " << w[1] << ")";
  return out.str();
}

}  // namespace

ParetoPoint scalarized_solve(const CaseData& data, std::array<double, 2> weights,
                             const SizingSpec& sizing, const BnbConfig& bnb) {
  const CodesignGraph model = build_graph(data, weights, sizing);
  MibResult mib;
  try {
    mib = branch_and_bound(model.graph, weights, bnb);
  } catch (const std::exception& err) {
    throw std::runtime_error("scalarized solve at " + describe_weights(weights) +
                             " failed: " + err.what());
  }
  if (mib.status == MibStatus::Infeasible) {
    throw std::runtime_error("scalarized solve at " + describe_weights(weights) +
                             " failed: problem infeasible");
  }
  if (mib.status == MibStatus::NoIncumbent) {
    throw std::runtime_error("scalarized solve at " + describe_weights(weights) +
                             " failed: no incumbent found");
  }

  const FlattenResult flat = model.graph.flatten(std::span<const double>(weights.data(), 2));
  OperatingSolution op = extract_solution(
      data, model, flat.index, mib.solution.x.head(flat.program.num_vars()));
  op.scalarized_objective = mib.objective;

  ParetoPoint point;
  point.weights = weights;
  point.cost = op.total_cost;
  point.loss = op.total_loss_mwh;
  point.sizes_mwh = op.sizes_mwh;
  point.bnb_gap = mib.gap;
  point.solution = std::make_shared<OperatingSolution>(std::move(op));
  return point;
}

ParetoPoint WeightCache::solve(const CaseData& data, std::array<double, 2> weights,
                               const SizingSpec& sizing, const BnbConfig& bnb) {
  const Key key{std::llround(weights[0] * 1e10), std::llround(weights[1] * 1e10)};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  ParetoPoint point = scalarized_solve(data, weights, sizing, bnb);
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.emplace(key, std::move(point)).first->second;
}

std::size_t WeightCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

AnchorPoints anchor_points(const CaseData& data, const SizingSpec& sizing, const BnbConfig& bnb,
                           WeightCache* cache) {
  WeightCache local;
  WeightCache& memo = cache ? *cache : local;
  AnchorPoints anchors;
  anchors.cost_anchor = memo.solve(data, {1.0, 0.0}, sizing, bnb);
  anchors.loss_anchor = memo.solve(data, {0.0, 1.0}, sizing, bnb);
  anchors.utopia = {anchors.cost_anchor.cost, anchors.loss_anchor.loss};
  return anchors;
}

GradientSweepResult gradient_sweep(const CaseData& data, const SweepConfig& config,
                                   const SizingSpec& sizing) {
  if (config.iterations < 1) throw std::invalid_argument("gradient_sweep: iterations must be >= 1");
  if (!(config.step > 0.0)) throw std::invalid_argument("gradient_sweep: step must be positive");

  WeightCache cache;
  std::array<double, 2> utopia{};
  if (config.utopia) {
    utopia = *config.utopia;
  } else {
    utopia = anchor_points(data, sizing, config.bnb, &cache).utopia;
  }
  const double cost_ref = std::max(std::abs(utopia[0]), 1e-12);
  const double loss_ref = std::max(std::abs(utopia[1]), 1e-12);

  GradientSweepResult result;
  std::array<double, 2> w = snap_to_simplex(config.initial);
  std::array<double, 2> ascent{0.0, 0.0};
  for (int k = 0; k < config.iterations; ++k) {
    result.trajectory.push_back(w);
    bool solved = false;
    try {
      ParetoPoint point = cache.solve(data, w, sizing, config.bnb);
      ascent = {point.cost / cost_ref, point.loss / loss_ref};
      result.points.push_back(std::move(point));
      solved = true;
    } catch (const std::exception& err) {
      result.failures.emplace_back(err.what());
    }
    (void)solved;  // on failure the previous ascent direction carries the update
    if (k + 1 < config.iterations) {
      const std::array<double, 2> stepped{w[0] + config.step * ascent[0],
                                          w[1] + config.step * ascent[1]};
      w = snap_to_simplex(stepped);
    }
  }
  return result;
}

GridSweepResult grid_sweep(const CaseData& data, int points, const SizingSpec& sizing,
                           const BnbConfig& bnb, int jobs) {
  if (points < 2) throw std::invalid_argument("grid_sweep: need at least 2 points");
  if (jobs <= 0) jobs = hardware_jobs();

  std::vector<std::array<double, 2>> weights(points);
  for (int i = 0; i < points; ++i) {
    const double w1 = static_cast<double>(i) / static_cast<double>(points - 1);
    weights[i] = {w1, 1.0 - w1};
  }

  std::vector<std::optional<ParetoPoint>> slots(points);
  std::vector<std::string> failures(points);
  parallel_for(points, jobs, [&](int i) {
    try {
      slots[i] = scalarized_solve(data, weights[i], sizing, bnb);
    } catch (const std::exception& err) {
      failures[i] = err.what();
    }
  });

  GridSweepResult result;
  for (int i = 0; i < points; ++i) {
    if (slots[i]) {
      result.points.push_back(std::move(*slots[i]));
    } else {
      result.failures.push_back(failures[i]);
    }
  }
  return result;
}

std::vector<ParetoPoint> nondominated_filter(std::vector<ParetoPoint> points) {
  std::vector<ParetoPoint> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (i == j) continue;
      const bool weakly = points[j].cost <= points[i].cost && points[j].loss <= points[i].loss;
      const bool strictly =
          points[j].cost < points[i].cost || points[j].loss < points[i].loss;
      if (weakly && strictly) dominated = true;
      // exact duplicates: keep only the first occurrence
      if (weakly && !strictly && j < i) dominated = true;
    }
    if (!dominated) kept.push_back(points[i]);
  }
  std::sort(kept.begin(), kept.end(),
            [](const ParetoPoint& a, const ParetoPoint& b) { return a.cost < b.cost; });
  return kept;
}

}  // namespace gridsoc
