#pragma once

#include <utility>
#include <vector>

#include "mdap/assignment.hpp"
#include "mdap/common.hpp"
#include "mdap/cost_tensor.hpp"
#include "mdap/matching.hpp"

namespace mdap {

// Reference bound on the i-th slice cost (i is 1-based): 2n/(n-i+1).
inline double dfm_slice_bound(int i, int n) {
  if (n < 1 || i < 1 || i > n) throw PreconditionError("dfm_slice_bound: need 1 <= i <= n");
  return 2.0 * n / (n - i + 1);
}

struct AxialRunReport {
  std::vector<double> slice_cost;   // Z_i, index 0 is slice 1
  std::vector<double> slice_bound;  // 2n/(n-i+1)
  double total = 0.0;
};

struct AxialResult {
  LatinAssignment assignment;
  AxialRunReport report;
};

// Sequential matching heuristic: slice by slice, take a minimum-cost perfect
// matching between 2- and 3-coordinates among the pairs no earlier slice
// used. The residual graph before slice i is (n-i+1)-regular bipartite, so a
// perfect matching always exists.
inline AxialResult axial_greedy(const CostTensor& t) {
  if (t.d() != 3) throw PreconditionError("axial_greedy: d must be 3");
  const int n = t.n();
  LatinAssignment out{n, std::vector<std::vector<int>>(n, std::vector<int>(n, -1))};
  AxialRunReport rep;
  rep.slice_cost.reserve(n);
  rep.slice_bound.reserve(n);
  std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    MatchMatrix m(n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (!used[j][k]) m.set(j, k, t(i, j, k));
    MatchResult r = min_cost_matching(m);
    for (int j = 0; j < n; ++j) {
      out.K[i][j] = r.perm[j];
      used[j][r.perm[j]] = 1;
    }
    rep.slice_cost.push_back(r.cost);
    rep.slice_bound.push_back(dfm_slice_bound(i + 1, n));
    rep.total += r.cost;
  }
  return {std::move(out), std::move(rep)};
}

// Sum over all n^{d-2} leading-coordinate slices of that slice's exact 2-D
// assignment optimum. Relaxes the axial constraints that couple slices, so
// it lower-bounds every axial solution.
inline double axial_lower_bound(const CostTensor& t) {
  const int n = t.n();
  const auto& flat = t.costs();
  std::uint64_t slices = 1;
  for (int q = 0; q < t.d() - 2; ++q) slices *= static_cast<std::uint64_t>(n);
  const std::uint64_t block = static_cast<std::uint64_t>(n) * n;
  double total = 0.0;
  for (std::uint64_t s = 0; s < slices; ++s) {
    std::vector<double> slab(flat.begin() + s * block, flat.begin() + (s + 1) * block);
    total += min_cost_matching(MatchMatrix::from_flat(n, slab)).cost;
  }
  return total;
}

}  // namespace mdap
