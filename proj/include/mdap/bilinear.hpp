#pragma once

#include <numeric>
#include <utility>
#include <vector>

#include "mdap/assignment.hpp"
#include "mdap/common.hpp"
#include "mdap/cost_tensor.hpp"
#include "mdap/matching.hpp"

namespace mdap {

// One-sided restrictions of the planar objective: with one permutation
// pinned, the other is an ordinary assignment problem, so each half-step is
// solved exactly by matching. Alternating the two halves gives a descent
// heuristic whose value sequence is non-increasing and terminates at a pair
// neither half-step improves.

inline double bilinear_objective(const CostTensor& c, const std::vector<int>& y,
                                 const std::vector<int>& z) {
  if (c.d() != 3) throw PreconditionError("bilinear_objective: d must be 3");
  const int n = c.n();
  if (!is_permutation_of_range(y, n) || !is_permutation_of_range(z, n))
    throw PreconditionError("bilinear_objective: y and z must be permutations of 0..n-1");
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += c(i, y[i], z[i]);
  return total;
}

namespace detail {

// maximize is handled by matching on (slab_max - entry) and re-reading the
// true value from the original costs afterwards.
inline std::pair<std::vector<int>, double> solve_one_block(const CostTensor& c,
                                                           const std::vector<int>& fixed,
                                                           bool fix_z, bool maximize) {
  const int n = c.n();
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int v = 0; v < n; ++v) d[i][v] = fix_z ? c(i, v, fixed[i]) : c(i, fixed[i], v);
  if (maximize) {
    double top = 0.0;
    for (const auto& row : d)
      for (double x : row) top = std::max(top, x);
    for (auto& row : d)
      for (double& x : row) x = top - x;
  }
  MatchResult r = min_cost_matching(MatchMatrix::from_rows(d));
  double value = 0.0;
  for (int i = 0; i < n; ++i)
    value += fix_z ? c(i, r.perm[i], fixed[i]) : c(i, fixed[i], r.perm[i]);
  return {std::move(r.perm), value};
}

}  // namespace detail

// Best y for fixed z: D[i][j] = C[i][j][z(i)].
inline std::pair<std::vector<int>, double> solve_fixed_z(const CostTensor& c,
                                                         const std::vector<int>& z,
                                                         bool maximize = false) {
  if (c.d() != 3) throw PreconditionError("solve_fixed_z: d must be 3");
  if (!is_permutation_of_range(z, c.n()))
    throw PreconditionError("solve_fixed_z: z must be a permutation of 0..n-1");
  return detail::solve_one_block(c, z, true, maximize);
}

// Best z for fixed y: D[i][k] = C[i][y(i)][k].
inline std::pair<std::vector<int>, double> solve_fixed_y(const CostTensor& c,
                                                         const std::vector<int>& y,
                                                         bool maximize = false) {
  if (c.d() != 3) throw PreconditionError("solve_fixed_y: d must be 3");
  if (!is_permutation_of_range(y, c.n()))
    throw PreconditionError("solve_fixed_y: y must be a permutation of 0..n-1");
  return detail::solve_one_block(c, y, false, maximize);
}

struct BilinearIterate {
  std::vector<int> y, z;
  double value = 0.0;
  int iteration = 0;
};

struct BilinearResult {
  BilinearIterate final;
  std::vector<double> trace;  // objective after the start and each iteration
  bool converged = false;     // false only when max_iters stopped it
};

// Alternate the two half-steps from (y0, z0). An iteration is one y-step
// followed by one z-step; a step's permutation is adopted only when it
// strictly improves the value, so exact ties keep the incumbent and a full
// iteration with no change is the stopping condition.
inline BilinearResult bilinear_alternate(const CostTensor& c, std::vector<int> y0,
                                         std::vector<int> z0, int max_iters = 100,
                                         bool maximize = false) {
  if (c.d() != 3) throw PreconditionError("bilinear_alternate: d must be 3");
  const int n = c.n();
  if (!is_permutation_of_range(y0, n) || !is_permutation_of_range(z0, n))
    throw PreconditionError("bilinear_alternate: y0 and z0 must be permutations of 0..n-1");
  if (max_iters < 1) throw PreconditionError("bilinear_alternate: max_iters must be >= 1");

  BilinearResult res;
  BilinearIterate cur{std::move(y0), std::move(z0), 0.0, 0};
  cur.value = bilinear_objective(c, cur.y, cur.z);
  res.trace.push_back(cur.value);
  auto better = [&](double a, double b) { return maximize ? a > b : a < b; };

  for (int it = 1; it <= max_iters; ++it) {
    bool changed = false;
    auto [y_new, vy] = solve_fixed_z(c, cur.z, maximize);
    if (better(vy, cur.value)) {
      cur.y = std::move(y_new);
      cur.value = vy;
      changed = true;
    }
    auto [z_new, vz] = solve_fixed_y(c, cur.y, maximize);
    if (better(vz, cur.value)) {
      cur.z = std::move(z_new);
      cur.value = vz;
      changed = true;
    }
    cur.iteration = it;
    res.trace.push_back(cur.value);
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  res.final = std::move(cur);
  return res;
}

inline std::vector<int> identity_permutation(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

}  // namespace mdap
