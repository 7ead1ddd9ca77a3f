#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mdap/assignment.hpp"
#include "mdap/common.hpp"
#include "mdap/cost_tensor.hpp"
#include "mdap/matching.hpp"

namespace mdap {

struct PlanarSolution {
  PlanarAssignment assignment;
  double cost = 0.0;
};

struct AxialSolution {
  LatinAssignment assignment;
  double cost = 0.0;
};

// Exhaustive minimum over all (n!)^2 permutation pairs. Intended as a slow,
// obviously-correct oracle; the hybrid route below is the faster twin used to
// cross-check it.
inline PlanarSolution exact_planar(const CostTensor& t, int n_cap = 5) {
  if (t.d() != 3) throw PreconditionError("exact_planar: d must be 3");
  if (n_cap > 6) throw PreconditionError("exact_planar: cap above hard limit 6");
  const int n = t.n();
  if (n > n_cap) throw PreconditionError("exact_planar: n too large for enumeration");

  std::vector<int> sigma(n), pi(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  PlanarSolution best;
  bool found = false;
  do {
    std::iota(pi.begin(), pi.end(), 0);
    do {
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += t(i, sigma[i], pi[i]);
      if (!found || c < best.cost) {
        best.assignment = {n, sigma, pi};
        best.cost = c;
        found = true;
      }
    } while (std::next_permutation(pi.begin(), pi.end()));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

// Independent second strategy: enumerate sigma only and solve the remaining
// third coordinate exactly as a 2-D matching on D[i][k] = C(i, sigma[i], k).
// The per-permutation cost is summed in the same order as exact_planar, so on
// instances with a unique optimum the two routes agree bit for bit.
inline PlanarSolution exact_planar_hybrid(const CostTensor& t, int n_cap = 8) {
  if (t.d() != 3) throw PreconditionError("exact_planar_hybrid: d must be 3");
  if (n_cap > 8) throw PreconditionError("exact_planar_hybrid: cap above hard limit 8");
  const int n = t.n();
  if (n > n_cap) throw PreconditionError("exact_planar_hybrid: n too large for enumeration");

  std::vector<int> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  PlanarSolution best;
  bool found = false;
  do {
    MatchMatrix d(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) d.set(i, k, t(i, sigma[i], k));
    const MatchResult r = min_cost_matching(d);
    if (!found || r.cost < best.cost) {
      best.assignment = {n, sigma, r.perm};
      best.cost = r.cost;
      found = true;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

// Visit every n x n Latin square in lexicographic row-major order.
// Counts for n = 1..4: 1, 2, 12, 576.
template <typename F>
inline void for_each_latin_square(int n, F&& visit) {
  if (n < 1) throw PreconditionError("for_each_latin_square: n must be >= 1");
  std::vector<std::vector<int>> K(n, std::vector<int>(n, -1));
  std::vector<std::vector<char>> row_used(n, std::vector<char>(n, 0));
  std::vector<std::vector<char>> col_used(n, std::vector<char>(n, 0));
  auto fill = [&](auto&& self, int cell) -> void {
    if (cell == n * n) {
      visit(const_cast<const std::vector<std::vector<int>>&>(K));
      return;
    }
    const int i = cell / n, j = cell % n;
    for (int v = 0; v < n; ++v) {
      if (row_used[i][v] || col_used[j][v]) continue;
      K[i][j] = v;
      row_used[i][v] = col_used[j][v] = 1;
      self(self, cell + 1);
      row_used[i][v] = col_used[j][v] = 0;
    }
    K[i][j] = -1;
  };
  fill(fill, 0);
}

// Exhaustive minimum over all Latin squares; ties keep the first square in
// lexicographic order.
inline AxialSolution exact_axial(const CostTensor& t, int n_cap = 4) {
  if (t.d() != 3) throw PreconditionError("exact_axial: d must be 3");
  if (n_cap > 5) throw PreconditionError("exact_axial: cap above hard limit 5");
  const int n = t.n();
  if (n > n_cap) throw PreconditionError("exact_axial: n too large for enumeration");

  AxialSolution best;
  bool found = false;
  for_each_latin_square(n, [&](const std::vector<std::vector<int>>& K) {
    double c = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c += t(i, j, K[i][j]);
    if (!found || c < best.cost) {
      best.assignment = {n, K};
      best.cost = c;
      found = true;
    }
  });
  return best;
}

// Sum over 1-planes of the plane minimum; valid for any d >= 2.
inline double planar_row_min_lower_bound(const CostTensor& t) {
  const int n = t.n();
  const std::uint64_t block = t.size() / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double m = t.flat(static_cast<std::uint64_t>(i) * block);
    for (std::uint64_t e = 1; e < block; ++e)
      m = std::min(m, t.flat(static_cast<std::uint64_t>(i) * block + e));
    total += m;
  }
  return total;
}

// Expected optimum of the n x n random 2-D assignment: sum_{i=1..n} 1/i^2.
inline double parisi_value(long long n) {
  if (n < 1) throw PreconditionError("parisi_value: n must be >= 1");
  double s = 0.0;
  for (long long i = 1; i <= n; ++i) s += 1.0 / (static_cast<double>(i) * static_cast<double>(i));
  return s;
}

inline double harmonic(int n) {
  double s = 0.0;
  for (int i = 1; i <= n; ++i) s += 1.0 / i;
  return s;
}

// zeta(2) = pi^2 / 6, the large-n limit of parisi_value.
inline constexpr double kZeta2 = 1.6449340668482264;

}  // namespace mdap
