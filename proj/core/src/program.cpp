#include "gridsoc/program.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gridsoc {

void ConicProgram::validate() const {
  if (A.rows() != b.size()) {
    throw std::invalid_argument("conic program: A has " + std::to_string(A.rows()) +
                                " rows but b has " + std::to_string(b.size()));
  }
  if (A.cols() != c.size()) {
    throw std::invalid_argument("conic program: A has " + std::to_string(A.cols()) +
                                " columns but c has " + std::to_string(c.size()));
  }
  long cone_total = 0;
  for (const Cone& k : cones) {
    if (k.dim <= 0) throw std::invalid_argument("conic program: cone with nonpositive dimension");
    if ((k.type == ConeType::SecondOrder || k.type == ConeType::RotatedSecondOrder) && k.dim < 2) {
      throw std::invalid_argument("conic program: second-order cone of dimension < 2");
    }
    cone_total += k.dim;
  }
  if (cone_total != A.rows()) {
    throw std::invalid_argument("conic program: cone dimensions sum to " +
                                std::to_string(cone_total) + " but A has " +
                                std::to_string(A.rows()) + " rows");
  }
  if (quadratic.rows() > 0) {
    if (quadratic.rows() != quadratic.cols() || quadratic.rows() != c.size()) {
      throw std::invalid_argument("conic program: quadratic part has wrong dimensions");
    }
  }
  for (const BinaryColumn& bc : binaries) {
    if (bc.column < 0 || bc.column >= num_vars()) {
      throw std::invalid_argument("conic program: binary column out of range");
    }
  }
}

ResidualSet residuals(const ConicProgram& program, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y, const Eigen::VectorXd& s) {
  if (x.size() != program.num_vars() || y.size() != program.num_rows() ||
      s.size() != program.num_rows()) {
    throw std::invalid_argument("residuals: dimension mismatch");
  }
  ResidualSet r;
  const double ctx = program.c.dot(x);
  const double bty = program.b.dot(y);
  r.primal = (program.A * x + s - program.b).norm() / (1.0 + program.b.norm());
  r.dual = (program.A.transpose() * y + program.c).norm() / (1.0 + program.c.norm());
  r.gap = std::abs(ctx + bty) / (1.0 + std::abs(ctx) + std::abs(bty));
  return r;
}

namespace {

// Factor Q = F'F. Fast path for diagonal Q; dense eigendecomposition otherwise
// (non-diagonal quadratics only show up in small programs here).
Eigen::SparseMatrix<double> factor_psd(const Eigen::SparseMatrix<double>& q) {
  const int n = static_cast<int>(q.rows());
  bool diagonal = true;
  for (int k = 0; k < q.outerSize() && diagonal; ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(q, k); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0) {
        diagonal = false;
        break;
      }
    }
  }
  std::vector<Eigen::Triplet<double>> trips;
  if (diagonal) {
    int row = 0;
    for (int k = 0; k < q.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(q, k); it; ++it) {
        if (it.value() == 0.0) continue;
        if (it.value() < 0.0) {
          throw std::invalid_argument("reformulate_quadratic: quadratic part is not PSD");
        }
        trips.emplace_back(row++, static_cast<int>(it.col()), std::sqrt(it.value()));
      }
    }
    Eigen::SparseMatrix<double> f(row, n);
    f.setFromTriplets(trips.begin(), trips.end());
    return f;
  }
  Eigen::MatrixXd dense = Eigen::MatrixXd(q);
  dense = 0.5 * (dense + dense.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lmax = std::max(lam.cwiseAbs().maxCoeff(), 1.0);
  int rank = 0;
  for (int i = 0; i < n; ++i) {
    if (lam[i] < -1e-9 * lmax) {
      throw std::invalid_argument("reformulate_quadratic: quadratic part is not PSD");
    }
    if (lam[i] > 1e-12 * lmax) ++rank;
  }
  int row = 0;
  for (int i = 0; i < n; ++i) {
    if (lam[i] <= 1e-12 * lmax) continue;
    const double s = std::sqrt(lam[i]);
    for (int j = 0; j < n; ++j) {
      const double v = s * es.eigenvectors()(j, i);
      if (v != 0.0) trips.emplace_back(row, j, v);
    }
    ++row;
  }
  Eigen::SparseMatrix<double> f(rank, n);
  f.setFromTriplets(trips.begin(), trips.end());
  return f;
}

}  // namespace

ConicProgram reformulate_quadratic(const ConicProgram& program) {
  program.validate();
  if (!program.has_quadratic()) {
    ConicProgram out = program;
    out.quadratic.resize(0, 0);
    return out;
  }

  const Eigen::SparseMatrix<double> f = factor_psd(program.quadratic);
  const int n = program.num_vars();
  const int m = program.num_rows();
  const int k = static_cast<int>(f.rows());

  // One epigraph variable t with (t, 1/2, Fx) in a rotated cone: x'Qx <= t.
  ConicProgram out;
  out.c.resize(n + 1);
  out.c.head(n) = program.c;
  out.c[n] = 1.0;
  out.objective_constant = program.objective_constant;
  out.cones = program.cones;
  out.binaries = program.binaries;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(program.A.nonZeros() + f.nonZeros() + 2);
  for (int col = 0; col < program.A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(program.A, col); it; ++it) {
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  out.b.resize(m + 2 + k);
  out.b.head(m) = program.b;
  trips.emplace_back(m, n, -1.0);  // s0 = t
  out.b[m] = 0.0;
  out.b[m + 1] = 0.5;  // s1 = 1/2
  for (int col = 0; col < f.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(f, col); it; ++it) {
      trips.emplace_back(m + 2 + static_cast<int>(it.row()), static_cast<int>(it.col()),
                         -it.value());
    }
  }
  out.b.tail(k).setZero();
  out.A.resize(m + 2 + k, n + 1);
  out.A.setFromTriplets(trips.begin(), trips.end());
  out.cones.push_back({ConeType::RotatedSecondOrder, k + 2});
  out.validate();
  return out;
}

void dump_program(const ConicProgram& program, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_program: cannot open " + path);
  char buf[64];
  out << program.num_vars() << " " << program.num_rows() << " " << program.A.nonZeros();
  for (const Cone& k : program.cones) {
    const char* tag = "?";
    switch (k.type) {
      case ConeType::Zero: tag = "z"; break;
      case ConeType::NonNegative: tag = "l"; break;
      case ConeType::SecondOrder: tag = "q"; break;
      case ConeType::RotatedSecondOrder: tag = "r"; break;
    }
    out << " " << tag << k.dim;
  }
  out << "\n";
  for (int col = 0; col < program.A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(program.A, col); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.row() << " " << it.col() << " " << buf << "\n";
    }
  }
  for (int i = 0; i < program.num_rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", program.b[i]);
    out << buf << "\n";
  }
  for (int i = 0; i < program.num_vars(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", program.c[i]);
    out << buf << "\n";
  }
  if (!out) throw std::runtime_error("dump_program: write failed for " + path);
}

}  // namespace gridsoc
