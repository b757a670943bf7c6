#pragma once

// Test-only oracles. Everything here computes expected values by independent
// means (exhaustive search, first-principles construction) and must not call
// into the solver or projection code it is used to check.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "gridsoc/program.hpp"

namespace oracle {

// Exhaustive active-set solve of min ||x - w||^2 s.t. x >= 0, sum x = 1.
// Every support set is tried with the closed-form equality-constrained
// minimizer; infeasible candidates are discarded.
inline std::vector<double> simplex_qp(const std::vector<double>& w) {
  const int n = static_cast<int>(w.size());
  if (n < 1 || n > 20) throw std::invalid_argument("simplex_qp: bad dimension");
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int support = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        sum += w[i];
        ++support;
      }
    }
    const double shift = (sum - 1.0) / support;
    std::vector<double> x(n, 0.0);
    bool feasible = true;
    double dist = 0.0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        x[i] = w[i] - shift;
        if (x[i] < -1e-12) {
          feasible = false;
          break;
        }
        dist += shift * shift;
      } else {
        dist += w[i] * w[i];
      }
    }
    if (!feasible) continue;
    if (dist < best_dist) {
      best_dist = dist;
      best = std::move(x);
    }
  }
  return best;
}

// A conic program with a known optimal primal-dual pair by construction:
// pick A and complementary (s*, y*) per cone block, then b := A x* + s*,
// c := -A' y* - 2 Q x*. KKT holds by construction, so the optimal value is
// c' x* + x*' Q x*.
struct ConstructedProgram {
  gridsoc::ConicProgram program;
  Eigen::VectorXd x_star, y_star, s_star;
  double objective = 0.0;
};

inline ConstructedProgram make_conic_instance(std::mt19937& rng, int n,
                                              const std::vector<gridsoc::Cone>& cones,
                                              bool with_quadratic = false) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> positive(0.2, 1.5);

  int m = 0;
  for (const auto& k : cones) m += k.dim;

  Eigen::MatrixXd a(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  }
  Eigen::VectorXd x_star(n);
  for (int j = 0; j < n; ++j) x_star[j] = normal(rng);

  Eigen::VectorXd s_star = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd y_star = Eigen::VectorXd::Zero(m);
  int at = 0;
  for (const auto& cone : cones) {
    const int d = cone.dim;
    switch (cone.type) {
      case gridsoc::ConeType::Zero:
        for (int i = 0; i < d; ++i) y_star[at + i] = normal(rng);
        break;
      case gridsoc::ConeType::NonNegative:
        for (int i = 0; i < d; ++i) {
          if (rng() & 1u) {
            s_star[at + i] = positive(rng);
          } else {
            y_star[at + i] = positive(rng);
          }
        }
        break;
      case gridsoc::ConeType::SecondOrder: {
        Eigen::VectorXd v(d - 1);
        for (int i = 0; i < d - 1; ++i) v[i] = normal(rng);
        const double t = v.norm();
        const double alpha = positive(rng), beta = positive(rng);
        s_star[at] = alpha * t;
        s_star.segment(at + 1, d - 1) = alpha * v;
        y_star[at] = beta * t;
        y_star.segment(at + 1, d - 1) = -beta * v;
        break;
      }
      case gridsoc::ConeType::RotatedSecondOrder: {
        Eigen::VectorXd w(d - 2);
        for (int i = 0; i < d - 2; ++i) w[i] = normal(rng);
        const double u = positive(rng);
        const double v = w.squaredNorm() / (2.0 * u);
        const double gamma = positive(rng);
        s_star[at] = u;
        s_star[at + 1] = v;
        s_star.segment(at + 2, d - 2) = w;
        y_star[at] = gamma * v;
        y_star[at + 1] = gamma * u;
        y_star.segment(at + 2, d - 2) = -gamma * w;
        break;
      }
    }
    at += d;
  }

  ConstructedProgram out;
  out.program.A = a.sparseView();
  out.program.b = a * x_star + s_star;
  out.program.cones = cones;
  if (with_quadratic) {
    Eigen::VectorXd diag(n);
    for (int j = 0; j < n; ++j) diag[j] = positive(rng);
    Eigen::MatrixXd q = diag.asDiagonal();
    out.program.quadratic = q.sparseView();
    out.program.c = -(a.transpose() * y_star) - 2.0 * q * x_star;
    out.objective = out.program.c.dot(x_star) + x_star.dot(q * x_star);
  } else {
    out.program.c = -(a.transpose() * y_star);
    out.objective = out.program.c.dot(x_star);
  }
  out.x_star = x_star;
  out.y_star = y_star;
  out.s_star = s_star;
  return out;
}

// Nearest-point check by sampling: p claims to be the projection of v onto the
// cone; every sampled cone point q must satisfy <v - p, q - p> <= tol.
template <typename SampleFn>
bool variational_inequality_holds(const Eigen::VectorXd& v, const Eigen::VectorXd& p,
                                  SampleFn&& sample, int trials, double tol = 1e-9) {
  for (int i = 0; i < trials; ++i) {
    const Eigen::VectorXd q = sample();
    if ((v - p).dot(q - p) > tol * (1.0 + v.norm()) * (1.0 + q.norm())) return false;
  }
  return true;
}

}  // namespace oracle
