#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gridsoc/bnb.hpp"
#include "gridsoc/codesign.hpp"

namespace gridsoc {

struct ParetoPoint {
  std::array<double, 2> weights{};
  double cost = 0.0;       // recomputed via evaluate_objectives, currency
  double loss = 0.0;       // recomputed via evaluate_objectives, MWh
  std::vector<double> sizes_mwh;
  double bnb_gap = 0.0;
  std::shared_ptr<const OperatingSolution> solution;
};

struct AnchorPoints {
  ParetoPoint cost_anchor;  // w = (1, 0)
  ParetoPoint loss_anchor;  // w = (0, 1)
  std::array<double, 2> utopia{};  // (anchor cost, anchor loss)
};

struct SweepConfig {
  int iterations = 10;  // K
  double step = 0.05;   // weight-update step size
  std::array<double, 2> initial{0.5, 0.5};
  std::optional<std::array<double, 2>> utopia;  // computed from anchors when absent
  BnbConfig bnb;
};

struct GradientSweepResult {
  std::vector<std::array<double, 2>> trajectory;  // K weight vectors, all on the simplex
  std::vector<ParetoPoint> points;
  std::vector<std::string> failures;
};

struct GridSweepResult {
  std::vector<ParetoPoint> points;
  std::vector<std::string> failures;
};

// One scalarized co-design (or fixed-size) solve; throws std::runtime_error
// with the weight vector attached on solve failure.
ParetoPoint scalarized_solve(const CaseData& data, std::array<double, 2> weights,
                             const SizingSpec& sizing = {}, const BnbConfig& bnb = {});

// Memo keyed on weights rounded to 1e-10; thread-safe.
class WeightCache {
 public:
  ParetoPoint solve(const CaseData& data, std::array<double, 2> weights,
                    const SizingSpec& sizing, const BnbConfig& bnb);
  std::size_t size() const;

 private:
  using Key = std::pair<long long, long long>;
  mutable std::mutex mutex_;
  std::map<Key, ParetoPoint> cache_;
};

AnchorPoints anchor_points(const CaseData& data, const SizingSpec& sizing = {},
                           const BnbConfig& bnb = {}, WeightCache* cache = nullptr);

// Projected weight-update sweep: solve at w_k, take the utopia-normalized
// objective values as the ascent direction, project back onto the simplex.
// Returns the whole trajectory and every solved point.
GradientSweepResult gradient_sweep(const CaseData& data, const SweepConfig& config,
                                   const SizingSpec& sizing = {});

// Evenly spaced scalarization weights w1 in {0, 1/(M-1), ..., 1}.
GridSweepResult grid_sweep(const CaseData& data, int points, const SizingSpec& sizing = {},
                           const BnbConfig& bnb = {}, int jobs = 1);

// Maximal mutually non-dominated subset, sorted by cost ascending; exact
// duplicates collapse to one representative.
std::vector<ParetoPoint> nondominated_filter(std::vector<ParetoPoint> points);

}  // namespace gridsoc
