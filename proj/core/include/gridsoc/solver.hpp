#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <limits>

#include "gridsoc/program.hpp"

namespace gridsoc {

enum class SolveStatus { Optimal, MaxIterations, InfeasibleDetected, UnboundedDetected };

const char* to_string(SolveStatus status);

struct SolverConfig {
  double primal_tol = 1e-6;
  double dual_tol = 1e-6;
  double gap_tol = 1e-6;
  int max_iterations = 100000;
  double relaxation = 1.6;  // over-relaxation parameter, in (0, 2)
  bool scaling = true;      // Ruiz equilibration + b/c normalization
  double matrix_scale = 1.0;  // extra constraint-block weight (primal/dual balance)
  double stiff_row_power = 0.5;  // re-weight rows by (original norm)^power
  double stiff_row_cap = 1e4;
  double infeasibility_tol = 1e-7;
  int check_interval = 25;
  // Project near-converged candidates onto the equality/active-bound rows with
  // a direct solve; accepted only when it lowers the residual score.
  bool polish = true;
  double polish_trigger = 100.0;  // attempt once the residual score falls below this
  double polish_activity_tol = 1e-5;

  void validate() const;
};

struct Solution {
  Eigen::VectorXd x;  // primal
  Eigen::VectorXd y;  // dual
  Eigen::VectorXd s;  // primal slack, s in K
  SolveStatus status = SolveStatus::MaxIterations;
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double dual_residual = std::numeric_limits<double>::quiet_NaN();
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();  // c'x + constant
};

// Operator-splitting solver over the homogeneous self-dual embedding.
// The quasi-definite KKT matrix is factorized once at construction and reused
// across iterations and across solves with different right-hand sides (the
// branch-and-bound layer re-solves with pinched bounds, which only touch b).
// A constructed solver is immutable; concurrent solve() calls are safe.
class ConicSolver {
 public:
  explicit ConicSolver(ConicProgram program, SolverConfig config = {});

  Solution solve() const;
  Solution solve(const Eigen::VectorXd& b_override) const;

  const ConicProgram& program() const { return program_; }
  const SolverConfig& config() const { return config_; }

 private:
  ConicProgram program_;  // unscaled
  SolverConfig config_;
  Eigen::VectorXd row_scale_;  // D
  Eigen::VectorXd col_scale_;  // E
  double sigma_c_ = 1.0;
  Eigen::SparseMatrix<double> scaled_a_;
  Eigen::VectorXd scaled_c_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kkt_;

  Solution run(const Eigen::VectorXd& b_unscaled) const;
};

inline Solution solve(const ConicProgram& program, const SolverConfig& config = {}) {
  return ConicSolver(program, config).solve();
}

}  // namespace gridsoc
