#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "gridsoc/cones.hpp"

namespace gridsoc {

struct BinaryColumn {
  int column = -1;
  // Deterministic branching tie-break, set by whoever built the program
  // (e.g. (battery index, hour)). Defaults order by column.
  int priority_major = 0;
  int priority_minor = 0;
};

// Standard-form conic program
//
//   minimize    c'x + x'Qx + constant
//   subject to  Ax + s = b,  s in K1 x K2 x ... x Kp
//
// Q is optional (empty when absent) and must be symmetric PSD; solve() requires
// it to have been removed first via reformulate_quadratic().
struct ConicProgram {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::vector<Cone> cones;
  double objective_constant = 0.0;
  Eigen::SparseMatrix<double> quadratic;  // n x n, or 0 x 0 when absent
  std::vector<BinaryColumn> binaries;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  bool has_quadratic() const { return quadratic.rows() > 0 && quadratic.nonZeros() > 0; }

  // Throws std::invalid_argument when dimensions/cone list are inconsistent.
  void validate() const;
};

struct ResidualSet {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

// ||Ax+s-b|| / (1+||b||),  ||A'y+c|| / (1+||c||),  |c'x+b'y| / (1+|c'x|+|b'y|).
ResidualSet residuals(const ConicProgram& program, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y, const Eigen::VectorXd& s);

// Replaces a PSD quadratic objective part with rotated-cone epigraph variables,
// returning an equivalent program with a purely linear objective. Programs
// without a quadratic part are returned unchanged. Throws on a non-PSD part.
ConicProgram reformulate_quadratic(const ConicProgram& program);

// Plain-text sparse-triplet dump: one header line (n, m, nnz, cone list),
// then A triplets, then b, then c.
void dump_program(const ConicProgram& program, const std::string& path);

}  // namespace gridsoc
