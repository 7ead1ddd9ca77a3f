#pragma once

#include <vector>

#include "mdap/common.hpp"
#include "mdap/cost_tensor.hpp"

namespace mdap {

inline bool is_permutation_of_range(const std::vector<int>& p, int n) {
  if (static_cast<int>(p.size()) != n) return false;
  std::vector<char> seen(n, 0);
  for (int v : p) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

// n triples (i, sigma[i], pi[i]) hitting each of the 3n planes exactly once.
struct PlanarAssignment {
  int n = 0;
  std::vector<int> sigma;  // 2nd coordinates
  std::vector<int> pi;     // 3rd coordinates

  bool valid() const {
    return is_permutation_of_range(sigma, n) && is_permutation_of_range(pi, n);
  }

  std::vector<Triple> triples() const {
    std::vector<Triple> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back({i, sigma[i], pi[i]});
    return out;
  }
};

inline bool is_planar_assignment(const std::vector<Triple>& triples, int n) {
  if (static_cast<int>(triples.size()) != n) return false;
  std::vector<int> c1, c2, c3;
  for (const Triple& t : triples) {
    c1.push_back(t.i);
    c2.push_back(t.j);
    c3.push_back(t.k);
  }
  return is_permutation_of_range(c1, n) && is_permutation_of_range(c2, n) &&
         is_permutation_of_range(c3, n);
}

// Cost summed in first-coordinate order so independent evaluations of the
// same assignment produce bit-identical totals.
inline double planar_cost(const CostTensor& c, const PlanarAssignment& a) {
  double total = 0.0;
  for (int i = 0; i < a.n; ++i) total += c(i, a.sigma[i], a.pi[i]);
  return total;
}

// n^2 triples (i, j, K[i][j]); every row and column of K is a permutation.
struct LatinAssignment {
  int n = 0;
  std::vector<std::vector<int>> K;
};

inline bool is_latin_assignment(const LatinAssignment& a) {
  if (static_cast<int>(a.K.size()) != a.n) return false;
  for (const auto& row : a.K)
    if (!is_permutation_of_range(row, a.n)) return false;
  for (int j = 0; j < a.n; ++j) {
    std::vector<int> col;
    col.reserve(a.n);
    for (int i = 0; i < a.n; ++i) col.push_back(a.K[i][j]);
    if (!is_permutation_of_range(col, a.n)) return false;
  }
  return true;
}

inline double latin_cost(const CostTensor& c, const LatinAssignment& a) {
  double total = 0.0;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) total += c(i, j, a.K[i][j]);
  return total;
}

}  // namespace mdap
