#include "gridsoc/cones.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gridsoc {

namespace {

void check_dim(const Cone& cone, std::size_t n) {
  if (static_cast<int>(n) != cone.dim) {
    throw std::invalid_argument("cone projection: vector length " + std::to_string(n) +
                                " does not match cone dimension " + std::to_string(cone.dim));
  }
}

void project_soc(std::span<double> v) {
  const double t = v[0];
  double nx = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) nx += v[i] * v[i];
  nx = std::sqrt(nx);
  if (nx <= t) return;
  if (nx <= -t) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  const double rho = 0.5 * (t + nx);
  const double scale = nx > 0.0 ? rho / nx : 0.0;
  v[0] = rho;
  for (std::size_t i = 1; i < v.size(); ++i) v[i] *= scale;
}

// Rotate (u, v, w) -> ((u+v)/sqrt2, (u-v)/sqrt2, w); this orthogonal map sends
// the rotated cone onto the standard second-order cone, so we project there
// and rotate back.
void project_rsoc(std::span<double> v) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  const double a = v[0];
  const double b = v[1];
  v[0] = (a + b) * inv_sqrt2;
  v[1] = (a - b) * inv_sqrt2;
  project_soc(v);
  const double t = v[0];
  const double z = v[1];
  v[0] = (t + z) * inv_sqrt2;
  v[1] = (t - z) * inv_sqrt2;
}

}  // namespace

void project_cone(const Cone& cone, std::span<double> v) {
  check_dim(cone, v.size());
  switch (cone.type) {
    case ConeType::Zero:
      std::fill(v.begin(), v.end(), 0.0);
      return;
    case ConeType::NonNegative:
      for (double& x : v) x = std::max(x, 0.0);
      return;
    case ConeType::SecondOrder:
      project_soc(v);
      return;
    case ConeType::RotatedSecondOrder:
      project_rsoc(v);
      return;
  }
}

void project_dual_cone(const Cone& cone, std::span<double> v) {
  if (cone.type == ConeType::Zero) {
    check_dim(cone, v.size());
    return;  // dual of {0} is the free cone
  }
  project_cone(cone, v);
}

double cone_violation(const Cone& cone, std::span<const double> v) {
  check_dim(cone, v.size());
  switch (cone.type) {
    case ConeType::Zero: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
    case ConeType::NonNegative: {
      double m = 0.0;
      for (double x : v) m = std::max(m, -x);
      return std::max(m, 0.0);
    }
    case ConeType::SecondOrder: {
      double nx = 0.0;
      for (std::size_t i = 1; i < v.size(); ++i) nx += v[i] * v[i];
      return std::max(0.0, std::sqrt(nx) - v[0]);
    }
    case ConeType::RotatedSecondOrder: {
      double nw = 0.0;
      for (std::size_t i = 2; i < v.size(); ++i) nw += v[i] * v[i];
      double viol = std::max({-v[0], -v[1], 0.0});
      return std::max(viol, nw - 2.0 * v[0] * v[1]);
    }
  }
  return 0.0;
}

std::vector<double> project_simplex(std::span<const double> w) {
  if (w.empty()) throw std::invalid_argument("project_simplex: empty input");
  const std::size_t n = w.size();
  std::vector<double> u(w.begin(), w.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  std::size_t support = 0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      support = j + 1;
      theta = candidate;
    }
  }
  (void)support;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(w[i] - theta, 0.0);
  return out;
}

}  // namespace gridsoc
