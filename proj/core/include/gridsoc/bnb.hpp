#pragma once

#include <cstdint>
#include <span>

#include "gridsoc/graph.hpp"
#include "gridsoc/solver.hpp"

namespace gridsoc {

struct BnbConfig {
  double gap_tol = 1e-4;  // absolute objective gap
  int node_limit = 10000;
  double integrality_tol = 1e-6;
  SolverConfig solver;

  void validate() const;
};

enum class MibStatus { Optimal, GapNotClosed, Infeasible, NoIncumbent };
const char* to_string(MibStatus status);

struct RelaxationReport {
  std::vector<double> indicator_values;  // binary-column values at the root relaxation
  double max_fractionality = 0.0;        // max distance to {0, 1}
};

struct MibResult {
  Solution solution;  // incumbent; indicator columns are exactly integral
  MibStatus status = MibStatus::NoIncumbent;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double bound = -std::numeric_limits<double>::infinity();  // proven lower bound
  double gap = std::numeric_limits<double>::infinity();
  int nodes_explored = 0;
  RelaxationReport root;
};

// Continuous relaxation (binaries relaxed to [0, 1]) with fractionality report.
MibResult solve_relaxed(const ModelGraph& graph, std::span<const double> weights,
                        const SolverConfig& config = {});

// Best-first branch and bound over conic relaxations, branching on the most
// fractional indicator (ties by its declared priority). Bound changes only
// touch b, so one KKT factorization serves every node.
MibResult branch_and_bound(const ModelGraph& graph, std::span<const double> weights,
                           const BnbConfig& config = {});

// Solves all 2^B fixings; ground truth for tests. Requires 2^B <= limit.
MibResult enumerate_exact(const ModelGraph& graph, std::span<const double> weights,
                          std::uint64_t limit = 256, const SolverConfig& config = {});

}  // namespace gridsoc
