#include "gridsoc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gridsoc {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::InfeasibleDetected: return "infeasible-detected";
    case SolveStatus::UnboundedDetected: return "unbounded-detected";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (primal_tol <= 0 || dual_tol <= 0 || gap_tol <= 0) {
    throw std::invalid_argument("solver config: tolerances must be positive");
  }
  if (relaxation <= 0.0 || relaxation >= 2.0) {
    throw std::invalid_argument("solver config: over-relaxation must lie in (0, 2)");
  }
  if (!(matrix_scale > 0.0)) {
    throw std::invalid_argument("solver config: matrix_scale must be positive");
  }
  if (max_iterations < 1) throw std::invalid_argument("solver config: max_iterations < 1");
  if (infeasibility_tol <= 0) throw std::invalid_argument("solver config: infeasibility_tol <= 0");
  if (check_interval < 1) throw std::invalid_argument("solver config: check_interval < 1");
}

namespace {

// Block-uniform infinity-norm row scaling: rows of a second-order block share
// one scale so membership is preserved under D^-1.
std::vector<std::pair<int, int>> cone_blocks(const std::vector<Cone>& cones) {
  std::vector<std::pair<int, int>> blocks;
  int offset = 0;
  for (const Cone& k : cones) {
    if (k.type == ConeType::SecondOrder || k.type == ConeType::RotatedSecondOrder) {
      blocks.emplace_back(offset, k.dim);
    } else {
      for (int i = 0; i < k.dim; ++i) blocks.emplace_back(offset + i, 1);
    }
    offset += k.dim;
  }
  return blocks;
}

double residual_score(const ResidualSet& res, const SolverConfig& config) {
  return std::max({res.primal / config.primal_tol, res.dual / config.dual_tol,
                   res.gap / config.gap_tol});
}

// Projects the candidate onto the affine set of equality rows plus active
// inequality rows (min-norm correction via a regularized KKT solve), then
// rebuilds the slack blockwise. Returns true when the polished point scores
// better than the input.
bool polish_candidate(const ConicProgram& unscaled, Solution& cand,
                      const SolverConfig& config) {
  const int n = unscaled.num_vars();
  std::vector<int> active;
  int offset = 0;
  for (const Cone& k : unscaled.cones) {
    if (k.type == ConeType::Zero) {
      for (int i = 0; i < k.dim; ++i) active.push_back(offset + i);
    } else if (k.type == ConeType::NonNegative) {
      for (int i = 0; i < k.dim; ++i) {
        const int row = offset + i;
        if (cand.s[row] <= config.polish_activity_tol * (1.0 + std::abs(unscaled.b[row]))) {
          active.push_back(row);
        }
      }
    }
    offset += k.dim;
  }
  if (active.empty()) return false;
  const int ma = static_cast<int>(active.size());
  constexpr double kReg = 1e-9;

  std::vector<int> row_slot(unscaled.num_rows(), -1);
  for (int j = 0; j < ma; ++j) row_slot[active[j]] = j;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n + ma + 2 * unscaled.A.nonZeros());
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
  for (int j = 0; j < ma; ++j) trips.emplace_back(n + j, n + j, -kReg);
  for (int col = 0; col < unscaled.A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(unscaled.A, col); it; ++it) {
      const int slot = row_slot[it.row()];
      if (slot < 0) continue;
      trips.emplace_back(n + slot, static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()), n + slot, it.value());
    }
  }
  Eigen::SparseMatrix<double> kkt(n + ma, n + ma);
  kkt.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(kkt);
  if (ldlt.info() != Eigen::Success) return false;

  Eigen::VectorXd rhs(n + ma);
  rhs.head(n) = cand.x;
  for (int j = 0; j < ma; ++j) rhs[n + j] = unscaled.b[active[j]];
  Eigen::VectorXd sol = ldlt.solve(rhs);
  for (int refine = 0; refine < 2; ++refine) {
    Eigen::VectorXd r = rhs - kkt * sol;
    r.tail(ma) -= kReg * sol.tail(ma);  // residual of the unregularized system
    sol += ldlt.solve(r);
  }

  Solution trial = cand;
  trial.x = sol.head(n);
  Eigen::VectorXd raw = unscaled.b - unscaled.A * trial.x;
  trial.s = raw;
  offset = 0;
  for (const Cone& k : unscaled.cones) {
    project_cone(k, std::span<double>(trial.s.data() + offset, k.dim));
    offset += k.dim;
  }
  const ResidualSet res = residuals(unscaled, trial.x, trial.y, trial.s);
  trial.primal_residual = res.primal;
  trial.dual_residual = res.dual;
  trial.duality_gap = res.gap;
  trial.objective = unscaled.c.dot(trial.x) + unscaled.objective_constant;
  if (residual_score(res, config) < residual_score({cand.primal_residual, cand.dual_residual,
                                                    cand.duality_gap},
                                                   config)) {
    cand = std::move(trial);
    return true;
  }
  return false;
}

}  // namespace

ConicSolver::ConicSolver(ConicProgram program, SolverConfig config)
    : program_(std::move(program)), config_(config) {
  config_.validate();
  program_.validate();
  if (program_.num_vars() == 0 || program_.num_rows() == 0) {
    throw std::invalid_argument("conic solver: structurally empty program");
  }
  if (program_.has_quadratic()) {
    throw std::invalid_argument(
        "conic solver: quadratic objective present; run reformulate_quadratic first");
  }

  const int n = program_.num_vars();
  const int m = program_.num_rows();
  row_scale_ = Eigen::VectorXd::Ones(m);
  col_scale_ = Eigen::VectorXd::Ones(n);
  scaled_a_ = program_.A;

  if (config_.scaling) {
    const auto blocks = cone_blocks(program_.cones);
    Eigen::VectorXd row_norm(m), col_norm(n);
    for (int round = 0; round < 10; ++round) {
      row_norm.setZero();
      for (int col = 0; col < scaled_a_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_a_, col); it; ++it) {
          row_norm[it.row()] = std::max(row_norm[it.row()], std::abs(it.value()));
        }
      }
      for (const auto& [start, dim] : blocks) {
        double block_norm = 0.0;
        for (int i = 0; i < dim; ++i) block_norm = std::max(block_norm, row_norm[start + i]);
        const double f = block_norm > 0.0 ? 1.0 / std::sqrt(block_norm) : 1.0;
        for (int i = 0; i < dim; ++i) row_norm[start + i] = f;
      }
      for (int i = 0; i < m; ++i) row_scale_[i] *= row_norm[i];

      col_norm.setZero();
      for (int col = 0; col < scaled_a_.outerSize(); ++col) {
        double cn = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_a_, col); it; ++it) {
          cn = std::max(cn, std::abs(it.value()) * row_norm[it.row()]);
        }
        col_norm[col] = cn > 0.0 ? 1.0 / std::sqrt(cn) : 1.0;
      }
      for (int j = 0; j < n; ++j) col_scale_[j] *= col_norm[j];

      for (int col = 0; col < scaled_a_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_a_, col); it; ++it) {
          it.valueRef() *= row_norm[it.row()] * col_norm[col];
        }
      }
    }
  }

  if (config_.scaling && config_.stiff_row_power > 0.0) {
    // Partially undo the equilibration on rows that started out much larger
    // than average (high-conductance balances): the iteration then drives
    // their absolute residuals correspondingly harder.
    Eigen::VectorXd original_norm = Eigen::VectorXd::Zero(m);
    for (int col = 0; col < program_.A.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(program_.A, col); it; ++it) {
        original_norm[it.row()] = std::max(original_norm[it.row()], std::abs(it.value()));
      }
    }
    const auto blocks = cone_blocks(program_.cones);
    Eigen::VectorXd boost(m);
    for (const auto& [start, dim] : blocks) {
      double block_norm = 0.0;
      for (int i = 0; i < dim; ++i) block_norm = std::max(block_norm, original_norm[start + i]);
      double f = block_norm > 1.0 ? std::pow(block_norm, config_.stiff_row_power) : 1.0;
      f = std::min(f, config_.stiff_row_cap);
      for (int i = 0; i < dim; ++i) boost[start + i] = f;
    }
    row_scale_ = row_scale_.cwiseProduct(boost);
    for (int col = 0; col < scaled_a_.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_a_, col); it; ++it) {
        it.valueRef() *= boost[it.row()];
      }
    }
  }

  if (config_.matrix_scale != 1.0) {
    row_scale_ *= config_.matrix_scale;
    scaled_a_ *= config_.matrix_scale;
  }

  scaled_c_ = col_scale_.cwiseProduct(program_.c);
  if (config_.scaling) {
    const double nc = scaled_c_.norm();
    sigma_c_ = nc > 1e-12 ? 1.0 / nc : 1.0;
    scaled_c_ *= sigma_c_;
  }

  // K = [I, A'; A, -I], symmetric quasi-definite; LDL' exists for any
  // symmetric permutation, so no numerical pivoting is needed.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n + m) + scaled_a_.nonZeros());
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
  for (int i = 0; i < m; ++i) trips.emplace_back(n + i, n + i, -1.0);
  for (int col = 0; col < scaled_a_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_a_, col); it; ++it) {
      trips.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  Eigen::SparseMatrix<double> kkt(n + m, n + m);
  kkt.setFromTriplets(trips.begin(), trips.end());
  kkt_.compute(kkt);
  if (kkt_.info() != Eigen::Success) {
    throw std::runtime_error("conic solver: KKT factorization failed");
  }
}

Solution ConicSolver::solve() const { return run(program_.b); }

Solution ConicSolver::solve(const Eigen::VectorXd& b_override) const {
  if (b_override.size() != program_.num_rows()) {
    throw std::invalid_argument("conic solver: b override has wrong dimension");
  }
  return run(b_override);
}

Solution ConicSolver::run(const Eigen::VectorXd& b_unscaled) const {
  const int n = program_.num_vars();
  const int m = program_.num_rows();
  const int nm = n + m;
  const double alpha = config_.relaxation;

  ConicProgram unscaled = program_;  // shallow-ish copy; b may be overridden
  unscaled.b = b_unscaled;

  Eigen::VectorXd scaled_b = row_scale_.cwiseProduct(b_unscaled);
  double sigma_b = 1.0;
  if (config_.scaling) {
    const double nb = scaled_b.norm();
    sigma_b = nb > 1e-12 ? 1.0 / nb : 1.0;
    scaled_b *= sigma_b;
  }

  Eigen::VectorXd h(nm);
  h.head(n) = scaled_c_;
  h.tail(m) = scaled_b;

  // Cached M^-1 h for the rank-one (Sherman-Morrison) correction.
  Eigen::VectorXd rhs(nm);
  rhs.head(n) = h.head(n);
  rhs.tail(m) = -h.tail(m);
  Eigen::VectorXd mh = kkt_.solve(rhs);
  const double denom = 1.0 + h.dot(mh);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(nm + 1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(nm + 1);
  u[nm] = 1.0;
  v[nm] = 1.0;

  Eigen::VectorXd w(nm + 1), ut(nm + 1), r(nm + 1), g(nm), p(nm);

  Solution best;
  best.x = Eigen::VectorXd::Zero(n);
  best.y = Eigen::VectorXd::Zero(m);
  best.s = Eigen::VectorXd::Zero(m);
  double best_score = std::numeric_limits<double>::infinity();
  double last_polish_score = std::numeric_limits<double>::infinity();

  const auto blocks = [&] {
    std::vector<std::pair<Cone, int>> out;
    int offset = 0;
    for (const Cone& k : program_.cones) {
      out.emplace_back(k, offset);
      offset += k.dim;
    }
    return out;
  }();

  auto project_embedding = [&](Eigen::VectorXd& vec) {
    // C = R^n x K* x R+
    for (const auto& [cone, offset] : blocks) {
      project_dual_cone(cone, std::span<double>(vec.data() + n + offset, cone.dim));
    }
    vec[nm] = std::max(vec[nm], 0.0);
  };

  int iter = 0;
  for (; iter < config_.max_iterations; ++iter) {
    w = u + v;
    g = w.head(nm) - h * w[nm];
    rhs.head(n) = g.head(n);
    rhs.tail(m) = -g.tail(m);
    p = kkt_.solve(rhs);
    ut.head(nm) = p - mh * (h.dot(p) / denom);
    ut[nm] = w[nm] + h.dot(ut.head(nm));

    r = alpha * ut + (1.0 - alpha) * u;
    u = r - v;
    project_embedding(u);
    v += u - r;

    const bool last = iter + 1 == config_.max_iterations;
    if ((iter + 1) % config_.check_interval != 0 && !last) continue;

    const double tau = u[nm];
    if (tau > 1e-12) {
      Solution cand;
      cand.x = col_scale_.cwiseProduct(u.head(n)) / (sigma_b * tau);
      cand.y = row_scale_.cwiseProduct(u.segment(n, m)) / (sigma_c_ * tau);
      cand.s = v.segment(n, m).cwiseQuotient(row_scale_) / (sigma_b * tau);
      const ResidualSet res = residuals(unscaled, cand.x, cand.y, cand.s);
      cand.primal_residual = res.primal;
      cand.dual_residual = res.dual;
      cand.duality_gap = res.gap;
      cand.iterations = iter + 1;
      cand.objective = program_.c.dot(cand.x) + program_.objective_constant;
      double score = residual_score(res, config_);
      if (config_.polish && score > 1.0 && score <= config_.polish_trigger &&
          score <= 0.5 * last_polish_score) {
        last_polish_score = score;
        if (polish_candidate(unscaled, cand, config_)) {
          score = residual_score(
              {cand.primal_residual, cand.dual_residual, cand.duality_gap}, config_);
        }
      }
      if (score < best_score) {
        best_score = score;
        best = cand;
      }
      if (score <= 1.0) {
        best = cand;
        best.status = SolveStatus::Optimal;
        return best;
      }
    }

    // Ray tests on the homogeneous embedding. Certificates are
    // self-validating: y lies in K* by construction, s is re-projected.
    {
      Eigen::VectorXd yr = row_scale_.cwiseProduct(u.segment(n, m));
      const double bty = b_unscaled.dot(yr);
      if (bty < -1e-12) {
        yr /= -bty;
        const double viol = (program_.A.transpose() * yr).lpNorm<Eigen::Infinity>();
        if (viol <= config_.infeasibility_tol * std::max(1.0, yr.lpNorm<Eigen::Infinity>())) {
          best.status = SolveStatus::InfeasibleDetected;
          best.y = yr;
          best.iterations = iter + 1;
          return best;
        }
      }
      Eigen::VectorXd xr = col_scale_.cwiseProduct(u.head(n));
      const double ctx = program_.c.dot(xr);
      if (ctx < -1e-12) {
        xr /= -ctx;
        Eigen::VectorXd sr = -(program_.A * xr);
        int offset = 0;
        for (const Cone& k : program_.cones) {
          project_cone(k, std::span<double>(sr.data() + offset, k.dim));
          offset += k.dim;
        }
        const double viol = (program_.A * xr + sr).lpNorm<Eigen::Infinity>();
        if (viol <= config_.infeasibility_tol * std::max(1.0, xr.lpNorm<Eigen::Infinity>())) {
          best.status = SolveStatus::UnboundedDetected;
          best.x = xr;
          best.s = sr;
          best.iterations = iter + 1;
          return best;
        }
      }
    }
  }

  if (config_.polish && best_score < std::numeric_limits<double>::infinity()) {
    if (polish_candidate(unscaled, best, config_)) {
      best_score = residual_score(
          {best.primal_residual, best.dual_residual, best.duality_gap}, config_);
    }
  }
  best.status = best_score <= 1.0 ? SolveStatus::Optimal : SolveStatus::MaxIterations;
  best.iterations = iter;
  return best;
}

}  // namespace gridsoc
