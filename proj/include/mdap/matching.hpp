#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mdap/common.hpp"

namespace mdap {

// Square cost matrix where each entry is a finite nonnegative real or
// forbidden. Forbidden entries are structurally absent edges, not large
// sentinel costs, so they can never contaminate arithmetic.
class MatchMatrix {
 public:
  explicit MatchMatrix(int n)
      : n_(n), cost_(static_cast<std::size_t>(n) * n, 0.0),
        allowed_(static_cast<std::size_t>(n) * n, 0) {
    if (n < 1) throw PreconditionError("MatchMatrix: n must be >= 1");
  }

  static MatchMatrix from_flat(int n, const std::vector<double>& cost) {
    MatchMatrix m(n);
    if (cost.size() != m.cost_.size())
      throw PreconditionError("MatchMatrix: cost length != n*n");
    m.cost_ = cost;
    std::fill(m.allowed_.begin(), m.allowed_.end(), 1);
    m.check_entries();
    return m;
  }

  static MatchMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    MatchMatrix m(n);
    for (int j = 0; j < n; ++j) {
      if (static_cast<int>(rows[j].size()) != n)
        throw PreconditionError("MatchMatrix: ragged rows");
      for (int k = 0; k < n; ++k) m.set(j, k, rows[j][k]);
    }
    return m;
  }

  int n() const { return n_; }
  bool allowed(int j, int k) const { return allowed_[idx(j, k)] != 0; }
  double cost(int j, int k) const { return cost_[idx(j, k)]; }

  void set(int j, int k, double c) {
    if (!(c >= 0.0) || !std::isfinite(c))
      throw PreconditionError("MatchMatrix: entry must be finite and >= 0");
    cost_[idx(j, k)] = c;
    allowed_[idx(j, k)] = 1;
  }

  void forbid(int j, int k) { allowed_[idx(j, k)] = 0; }

 private:
  std::size_t idx(int j, int k) const {
    if (j < 0 || j >= n_ || k < 0 || k >= n_)
      throw PreconditionError("MatchMatrix: index out of range");
    return static_cast<std::size_t>(j) * n_ + k;
  }
  void check_entries() const {
    for (std::size_t e = 0; e < cost_.size(); ++e)
      if (allowed_[e] && (!(cost_[e] >= 0.0) || !std::isfinite(cost_[e])))
        throw PreconditionError("MatchMatrix: entry must be finite and >= 0");
  }

  int n_;
  std::vector<double> cost_;
  std::vector<uint8_t> allowed_;
};

struct MatchResult {
  std::vector<int> perm;  // row j matched to column perm[j]
  double cost = 0.0;
  // Dual potentials certifying optimality: cost(j,k) - u[j] - v[k] >= 0 on
  // every allowed entry, with equality on matched entries. Empty for the
  // brute-force oracle.
  std::vector<double> u;
  std::vector<double> v;
};

// Augmenting-path check that a perfect matching avoiding forbidden entries
// exists at all. Recursion depth is at most n.
inline bool has_perfect_matching(const MatchMatrix& m) {
  const int n = m.n();
  std::vector<int> match_col(n, -1);
  std::vector<char> visited(n);
  auto augment = [&](auto&& self, int row) -> bool {
    for (int c = 0; c < n; ++c) {
      if (!m.allowed(row, c) || visited[c]) continue;
      visited[c] = 1;
      if (match_col[c] == -1 || self(self, match_col[c])) {
        match_col[c] = row;
        return true;
      }
    }
    return false;
  };
  for (int r = 0; r < n; ++r) {
    std::fill(visited.begin(), visited.end(), 0);
    if (!augment(augment, r)) return false;
  }
  return true;
}

// Exact minimum-cost perfect matching by shortest augmenting paths over
// reduced costs (potentials u, v), O(n^3). Forbidden entries are skipped
// structurally. Deterministic: ties resolve by scan order.
inline MatchResult min_cost_matching(const MatchMatrix& m) {
  const int n = m.n();
  if (!has_perfect_matching(m))
    throw InfeasibleError("min_cost_matching: no perfect matching avoids forbidden entries");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        if (m.allowed(i0 - 1, j - 1)) {
          const double cur = m.cost(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == -1 || delta == kInf)
        throw InfeasibleError("min_cost_matching: augmenting path search stuck");
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  MatchResult r;
  r.perm.assign(n, -1);
  for (int j = 1; j <= n; ++j) r.perm[p[j] - 1] = j - 1;
  // Sum in row order so equal permutations always yield bit-identical costs.
  r.cost = 0.0;
  for (int j = 0; j < n; ++j) r.cost += m.cost(j, r.perm[j]);
  r.u.assign(n, 0.0);
  r.v.assign(n, 0.0);
  for (int i = 1; i <= n; ++i) r.u[i - 1] = u[i];
  for (int j = 1; j <= n; ++j) r.v[j - 1] = v[j];
  return r;
}

// Exhaustive oracle over all n! permutations; ties keep the lexicographically
// first permutation.
inline MatchResult brute_force_matching(const MatchMatrix& m) {
  const int n = m.n();
  if (n > 8) throw PreconditionError("brute_force_matching: n must be <= 8");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  MatchResult best;
  bool found = false;
  do {
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) ok = m.allowed(j, perm[j]);
    if (!ok) continue;
    double c = 0.0;
    for (int j = 0; j < n; ++j) c += m.cost(j, perm[j]);
    if (!found || c < best.cost) {
      best.perm = perm;
      best.cost = c;
      found = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (!found)
    throw InfeasibleError("brute_force_matching: no perfect matching avoids forbidden entries");
  return best;
}

}  // namespace mdap
