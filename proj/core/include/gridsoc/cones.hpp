#pragma once

#include <span>
#include <vector>

namespace gridsoc {

enum class ConeType {
  Zero,                // {0}
  NonNegative,         // {v : v >= 0}, elementwise
  SecondOrder,         // {(t, x) : ||x||_2 <= t}
  RotatedSecondOrder,  // {(u, v, w) : 2 u v >= ||w||_2^2, u >= 0, v >= 0}
};

struct Cone {
  ConeType type;
  int dim;
};

// Euclidean projection onto the cone, in place. v.size() must match cone.dim.
void project_cone(const Cone& cone, std::span<double> v);

// Projection onto the dual cone: free for Zero, identical otherwise
// (NonNegative, SecondOrder and RotatedSecondOrder are self-dual).
void project_dual_cone(const Cone& cone, std::span<double> v);

// Membership distance: max violation of the cone's defining inequalities
// (0 for points inside). Used by diagnostics and tests.
double cone_violation(const Cone& cone, std::span<const double> v);

// Euclidean projection onto the probability simplex {w >= 0, sum(w) = 1},
// via the exact sort-and-threshold algorithm. Throws on empty input.
std::vector<double> project_simplex(std::span<const double> w);

}  // namespace gridsoc
