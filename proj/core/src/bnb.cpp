#include "gridsoc/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace gridsoc {

const char* to_string(MibStatus status) {
  switch (status) {
    case MibStatus::Optimal: return "optimal";
    case MibStatus::GapNotClosed: return "gap-not-closed";
    case MibStatus::Infeasible: return "infeasible";
    case MibStatus::NoIncumbent: return "no-incumbent";
  }
  return "unknown";
}

void BnbConfig::validate() const {
  if (gap_tol <= 0.0) throw std::invalid_argument("bnb config: gap_tol must be positive");
  if (node_limit < 1) throw std::invalid_argument("bnb config: node_limit must be >= 1");
  if (integrality_tol <= 0.0) throw std::invalid_argument("bnb config: integrality_tol <= 0");
  solver.validate();
}

namespace {

struct Prepared {
  ConicProgram program;  // post quadratic reformulation
  std::vector<BinaryColumn> binaries;
  std::vector<std::pair<int, int>> bound_rows;  // (lower row, upper row) per binary
};

Prepared prepare(const ModelGraph& graph, std::span<const double> weights) {
  FlattenResult flat = graph.flatten(weights);
  Prepared prep;
  prep.program = reformulate_quadratic(flat.program);
  prep.binaries = prep.program.binaries;
  std::sort(prep.binaries.begin(), prep.binaries.end(),
            [](const BinaryColumn& a, const BinaryColumn& b) {
              return std::tie(a.priority_major, a.priority_minor, a.column) <
                     std::tie(b.priority_major, b.priority_minor, b.column);
            });
  // Binaries always carry [0, 1] bounds, so both bound rows exist. The
  // quadratic reformulation appends rows, leaving these indices valid.
  for (const BinaryColumn& bc : prep.binaries) {
    const auto& info = flat.index.columns[bc.column];
    if (info.lower_bound_row < 0 || info.upper_bound_row < 0) {
      throw std::logic_error("bnb: binary column lacks bound rows");
    }
    prep.bound_rows.emplace_back(info.lower_bound_row, info.upper_bound_row);
  }
  return prep;
}

// fixing: -1 free, otherwise fixed value in {0, 1}
Eigen::VectorXd rhs_for(const Prepared& prep, const std::vector<signed char>& fixing) {
  Eigen::VectorXd b = prep.program.b;
  for (std::size_t i = 0; i < fixing.size(); ++i) {
    if (fixing[i] < 0) continue;
    const double v = static_cast<double>(fixing[i]);
    b[prep.bound_rows[i].first] = -v;  // lower bound row: s = z - lb
    b[prep.bound_rows[i].second] = v;  // upper bound row: s = ub - z
  }
  return b;
}

RelaxationReport report_from(const Prepared& prep, const Eigen::VectorXd& x) {
  RelaxationReport report;
  for (const BinaryColumn& bc : prep.binaries) {
    const double z = x[bc.column];
    report.indicator_values.push_back(z);
    report.max_fractionality = std::max(report.max_fractionality, std::abs(z - std::round(z)));
  }
  return report;
}

void snap_binaries(const Prepared& prep, Solution& sol) {
  for (const BinaryColumn& bc : prep.binaries) {
    sol.x[bc.column] = std::round(sol.x[bc.column]);
  }
  sol.objective = prep.program.c.dot(sol.x) + prep.program.objective_constant;
}

}  // namespace

MibResult solve_relaxed(const ModelGraph& graph, std::span<const double> weights,
                        const SolverConfig& config) {
  const Prepared prep = prepare(graph, weights);
  const ConicSolver solver(prep.program, config);
  MibResult out;
  out.solution = solver.solve();
  out.nodes_explored = 1;
  switch (out.solution.status) {
    case SolveStatus::Optimal:
      out.status = MibStatus::Optimal;  // of the relaxation
      out.objective = out.solution.objective;
      out.bound = out.solution.objective;
      out.gap = 0.0;
      out.root = report_from(prep, out.solution.x);
      break;
    case SolveStatus::InfeasibleDetected:
      out.status = MibStatus::Infeasible;
      break;
    case SolveStatus::UnboundedDetected:
      out.status = MibStatus::NoIncumbent;
      break;
    case SolveStatus::MaxIterations:
      throw std::runtime_error("solve_relaxed: solver hit iteration limit (residuals " +
                               std::to_string(out.solution.primal_residual) + ", " +
                               std::to_string(out.solution.dual_residual) + ")");
  }
  return out;
}

MibResult branch_and_bound(const ModelGraph& graph, std::span<const double> weights,
                           const BnbConfig& config) {
  config.validate();
  const Prepared prep = prepare(graph, weights);
  const ConicSolver solver(prep.program, config.solver);
  const int nbin = static_cast<int>(prep.binaries.size());

  MibResult out;

  struct Node {
    double bound;
    long seq;
    std::vector<signed char> fixing;
    bool operator>(const Node& other) const {
      return std::tie(bound, seq) > std::tie(other.bound, other.seq);
    }
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  long seq = 0;

  bool have_incumbent = false;
  Solution incumbent;
  double incumbent_obj = std::numeric_limits<double>::infinity();

  const auto solve_fixing = [&](const std::vector<signed char>& fixing) {
    return solver.solve(rhs_for(prep, fixing));
  };

  // Root relaxation.
  std::vector<signed char> free_all(nbin, -1);
  Solution root = solve_fixing(free_all);
  out.nodes_explored = 1;
  if (root.status == SolveStatus::InfeasibleDetected) {
    out.status = MibStatus::Infeasible;
    out.solution = root;
    return out;
  }
  if (root.status == SolveStatus::UnboundedDetected) {
    out.status = MibStatus::NoIncumbent;
    out.solution = root;
    return out;
  }
  if (root.status == SolveStatus::MaxIterations) {
    throw std::runtime_error("branch_and_bound: root relaxation hit iteration limit");
  }
  out.root = report_from(prep, root.x);

  const auto fractionality = [&](const Eigen::VectorXd& x, const std::vector<signed char>& fixing,
                                 int& branch_var) {
    double worst = 0.0;
    branch_var = -1;
    for (int i = 0; i < nbin; ++i) {
      if (fixing[i] >= 0) continue;
      const double z = x[prep.binaries[i].column];
      const double frac = std::abs(z - std::round(z));
      if (frac > worst + 1e-15) {
        worst = frac;
        branch_var = i;
      }
    }
    return worst;
  };

  int root_branch = -1;
  const double root_frac = fractionality(root.x, free_all, root_branch);
  if (root_frac <= config.integrality_tol) {
    incumbent = root;
    snap_binaries(prep, incumbent);
    incumbent_obj = incumbent.objective;
    have_incumbent = true;
    out.status = MibStatus::Optimal;
    out.solution = incumbent;
    out.objective = incumbent_obj;
    out.bound = root.objective;
    out.gap = std::max(0.0, incumbent_obj - root.objective);
    return out;
  }

  // Incumbent seeding: round the root indicators and re-solve fully fixed.
  {
    std::vector<signed char> rounded(nbin);
    for (int i = 0; i < nbin; ++i) {
      rounded[i] = static_cast<signed char>(std::round(root.x[prep.binaries[i].column]));
    }
    Solution seeded = solve_fixing(rounded);
    if (seeded.status == SolveStatus::Optimal) {
      incumbent = seeded;
      snap_binaries(prep, incumbent);
      incumbent_obj = incumbent.objective;
      have_incumbent = true;
    }
  }

  open.push({root.objective, seq++, std::move(free_all)});
  double global_bound = root.objective;
  bool bound_closed = false;

  while (!open.empty() && out.nodes_explored < config.node_limit) {
    Node node = open.top();
    open.pop();
    global_bound = node.bound;
    if (have_incumbent && global_bound >= incumbent_obj - config.gap_tol) {
      bound_closed = true;  // best-first: remaining nodes cannot improve
      break;
    }

    Solution sol = solve_fixing(node.fixing);
    if (sol.status == SolveStatus::InfeasibleDetected) continue;
    if (sol.status == SolveStatus::MaxIterations) {
      throw std::runtime_error("branch_and_bound: node relaxation hit iteration limit");
    }
    if (sol.status == SolveStatus::UnboundedDetected) continue;
    ++out.nodes_explored;

    if (have_incumbent && sol.objective >= incumbent_obj - config.gap_tol) continue;

    int branch_var = -1;
    const double frac = fractionality(sol.x, node.fixing, branch_var);
    if (frac <= config.integrality_tol) {
      Solution candidate = sol;
      snap_binaries(prep, candidate);
      if (!have_incumbent || candidate.objective < incumbent_obj) {
        incumbent = candidate;
        incumbent_obj = candidate.objective;
        have_incumbent = true;
      }
      continue;
    }

    for (int v = 0; v <= 1; ++v) {
      std::vector<signed char> fixing = node.fixing;
      fixing[branch_var] = static_cast<signed char>(v);
      open.push({sol.objective, seq++, std::move(fixing)});
    }
  }

  if (!bound_closed) {
    if (!open.empty()) {
      global_bound = open.top().bound;  // node limit hit mid-search
    } else if (have_incumbent) {
      global_bound = incumbent_obj;  // search exhausted
    }
  }

  if (!have_incumbent) {
    out.status = open.empty() ? MibStatus::Infeasible : MibStatus::NoIncumbent;
    out.bound = global_bound;
    return out;
  }
  out.solution = incumbent;
  out.objective = incumbent_obj;
  out.bound = global_bound;
  out.gap = std::max(0.0, incumbent_obj - global_bound);
  out.status = out.gap <= config.gap_tol ? MibStatus::Optimal : MibStatus::GapNotClosed;
  return out;
}

MibResult enumerate_exact(const ModelGraph& graph, std::span<const double> weights,
                          std::uint64_t limit, const SolverConfig& config) {
  const Prepared prep = prepare(graph, weights);
  const int nbin = static_cast<int>(prep.binaries.size());
  if (nbin >= 63 || (std::uint64_t{1} << nbin) > limit) {
    throw std::invalid_argument("enumerate_exact: 2^" + std::to_string(nbin) +
                                " fixings exceed the limit of " + std::to_string(limit));
  }
  const ConicSolver solver(prep.program, config);

  MibResult out;
  bool have_best = false;
  const std::uint64_t total = std::uint64_t{1} << nbin;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::vector<signed char> fixing(nbin);
    for (int i = 0; i < nbin; ++i) fixing[i] = (mask >> i) & 1u ? 1 : 0;
    Solution sol = solver.solve(rhs_for(prep, fixing));
    ++out.nodes_explored;
    if (sol.status == SolveStatus::MaxIterations) {
      throw std::runtime_error("enumerate_exact: solver hit iteration limit");
    }
    if (sol.status != SolveStatus::Optimal) continue;
    if (!have_best || sol.objective < out.objective) {
      snap_binaries(prep, sol);
      out.solution = sol;
      out.objective = sol.objective;
      have_best = true;
    }
  }
  if (!have_best) {
    out.status = MibStatus::Infeasible;
    return out;
  }
  out.status = MibStatus::Optimal;
  out.bound = out.objective;
  out.gap = 0.0;
  return out;
}

}  // namespace gridsoc
