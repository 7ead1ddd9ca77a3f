#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdap/assignment.hpp"
#include "mdap/bdts_schedule.hpp"
#include "mdap/common.hpp"
#include "mdap/cost_tensor.hpp"
#include "mdap/refreshable_costs.hpp"

namespace mdap {

// Partial planar assignment: a set of matched first coordinates, each holding
// one triple, with no 2- or 3-coordinate used twice.
struct PartialState {
  int n = 0;
  std::vector<int> sigma, pi;      // per first coordinate, -1 when unmatched
  std::vector<char> matched;       // first coordinates
  std::vector<char> used2, used3;  // 2-/3-coordinates in use
  int matched_count = 0;

  explicit PartialState(int n_)
      : n(n_), sigma(n_, -1), pi(n_, -1), matched(n_, 0), used2(n_, 0), used3(n_, 0) {}

  int unmatched_count() const { return n - matched_count; }

  void add(const Triple& t) {
    if (matched[t.i] || used2[t.j] || used3[t.k])
      throw std::logic_error("PartialState::add: coordinate already in use");
    matched[t.i] = 1;
    used2[t.j] = 1;
    used3[t.k] = 1;
    sigma[t.i] = t.j;
    pi[t.i] = t.k;
    ++matched_count;
  }

  void remove(const Triple& t) {
    if (!matched[t.i] || sigma[t.i] != t.j || pi[t.i] != t.k)
      throw std::logic_error("PartialState::remove: not the current match");
    matched[t.i] = 0;
    used2[t.j] = 0;
    used3[t.k] = 0;
    sigma[t.i] = -1;
    pi[t.i] = -1;
    --matched_count;
  }

  bool validate() const {
    int cnt = 0;
    std::vector<char> seen2(n, 0), seen3(n, 0);
    for (int i = 0; i < n; ++i) {
      if (matched[i]) {
        ++cnt;
        if (sigma[i] < 0 || sigma[i] >= n || pi[i] < 0 || pi[i] >= n) return false;
        if (!used2[sigma[i]] || !used3[pi[i]]) return false;
        if (seen2[sigma[i]] || seen3[pi[i]]) return false;
        seen2[sigma[i]] = 1;
        seen3[pi[i]] = 1;
      } else if (sigma[i] != -1 || pi[i] != -1) {
        return false;
      }
    }
    if (cnt != matched_count) return false;
    for (int c = 0; c < n; ++c)
      if (seen2[c] != used2[c] || seen3[c] != used3[c]) return false;
    return true;
  }

  PlanarAssignment to_assignment() const {
    if (matched_count != n)
      throw std::logic_error("PartialState::to_assignment: not complete");
    return {n, sigma, pi};
  }
};

// One augmentation step: a perfect binary tree of added triples in heap order
// (root at position 1, children of p at 2p and 2p+1, leaves at depth k), plus
// the displaced match of every non-root position's first coordinate.
// 2^{k+1}-1 triples added, 2^{k+1}-2 removed.
struct AltTree {
  int k = 0;
  std::vector<Triple> added;    // index by position, slot 0 unused
  std::vector<Triple> removed;  // index by position, slots 0..1 unused
  std::vector<double> probed;   // accepted oracle value per added position
  std::vector<double> charge;   // accounting cost per added position

  explicit AltTree(int k_)
      : k(k_),
        added(std::size_t{1} << (k_ + 1)),
        removed(std::size_t{1} << (k_ + 1)),
        probed(std::size_t{1} << (k_ + 1), 0.0),
        charge(std::size_t{1} << (k_ + 1), 0.0) {}

  int positions() const { return (1 << (k + 1)) - 1; }
};

enum class Phase { Greedy = 0, Main = 1, Final = 2 };

struct CommitEvent {
  Phase phase = Phase::Greedy;
  int round = 0;  // greedy: index; main: round t; final: index
  Triple t;
  bool add = true;
  double charge = 0.0;     // added: accounting cost; removed: the charge given back
  double offset_at = 0.0;  // cumulative refresh offset at commit (additions)
  double w_eff = 0.0;      // threshold in force at acceptance (additions)
};

struct RoundStat {
  int t = 0;
  double w = 0.0;
  int augmentations = 0;
  int escalations = 0;
};

struct BdtsReport {
  double greedy_cost = 0.0;
  double main_cost = 0.0;
  double final_cost = 0.0;
  double total_cost = 0.0;
  // Distributional runs: equals total_cost (the accounting is the bound).
  // Fixed runs: NaN, there is no distributional guarantee to report.
  double upper_bound_cost = std::numeric_limits<double>::quiet_NaN();
  int escalations = 0;
  int rounds_executed = 0;
  int augmentations = 0;
  std::vector<RoundStat> round_stats;  // rounds with activity only
  std::vector<CommitEvent> trace;
};

struct BdtsOptions {
  int k = 1;
  int escalation_cap = 8;      // budget doublings allowed per index
  int pools_cap = 64;          // candidate pool size ceiling
  long probe_budget = 4000000; // oracle probes per tree search attempt
  double final_prefactor = 2.0;
  double L = 1.0;
  bool validate_steps = true;
  bool keep_trace = true;
};

namespace detail {

struct ProbeBudgetExceeded {};

// Undo log for the backtracking searches: (array, index, previous value).
struct MarkLog {
  std::vector<std::tuple<std::vector<char>*, int, char>> entries;

  void set(std::vector<char>& arr, int idx, char val) {
    entries.emplace_back(&arr, idx, arr[idx]);
    arr[idx] = val;
  }
  std::size_t size() const { return entries.size(); }
  void unwind(std::size_t to) {
    while (entries.size() > to) {
      auto& [arr, idx, prev] = entries.back();
      (*arr)[idx] = prev;
      entries.pop_back();
    }
  }
};

}  // namespace detail

// Tree search for the main rounds. Candidate pools are built bottom-up:
// leaf pools hold matched first coordinates that can be re-matched on a pair
// of unused 2-/3-coordinates within budget, inner pools hold matched first
// coordinates witnessed by a pair drawn from their children's pools. Pools of
// distinct positions at the same depth are disjoint. A tree is then extracted
// top-down with backtracking under global distinctness of owners and of leaf
// coordinates.
template <SearchCosts O>
std::optional<AltTree> find_tree(const PartialState& st, O& oracle, int i0, double w,
                                 int k, const BdtsOptions& opts) {
  const int n = st.n;
  long budget = opts.probe_budget;
  auto probe = [&](int a, int b, int c) -> std::optional<double> {
    if (--budget < 0) throw detail::ProbeBudgetExceeded{};
    auto v = oracle.query(triple_index({a, b, c}, n), w);
    if (v && *v <= w) return v;
    return std::nullopt;
  };

  try {
    const int x = st.unmatched_count();
    // Pool size targets: nu(0) = w n x^2 / 2 at the leaves, then
    // nu(l+1) = w n nu(l)^2 / 2 moving up, clamped to [1, pools_cap].
    std::vector<double> nu(k);
    nu[0] = w * n * static_cast<double>(x) * x / 2.0;
    for (int l = 1; l < k; ++l) nu[l] = w * n * nu[l - 1] * nu[l - 1] / 2.0;
    auto cap_at_depth = [&](int d) {
      const double v = nu[k - d];
      if (!(v < static_cast<double>(opts.pools_cap)))
        return opts.pools_cap;
      return std::max(1, static_cast<int>(std::ceil(v)));
    };

    std::vector<std::vector<int>> pools(std::size_t{1} << (k + 1));

    // Leaf pools, depth k. Qualification does not depend on the pool, so each
    // qualified candidate is dealt to the next pool with room.
    {
      const int cap = cap_at_depth(k);
      const int first = 1 << k, last = (1 << (k + 1)) - 1;
      int cursor = first;
      auto next_open = [&]() -> int {
        for (int step = 0; step <= last - first; ++step) {
          const int p = first + (cursor - first + step) % (last - first + 1);
          if (static_cast<int>(pools[p].size()) < cap) return p;
        }
        return -1;
      };
      for (int v = 0; v < n; ++v) {
        if (!st.matched[v]) continue;
        const int p = next_open();
        if (p < 0) break;
        bool ok = false;
        for (int x2 = 0; x2 < n && !ok; ++x2) {
          if (st.used2[x2]) continue;
          for (int x3 = 0; x3 < n && !ok; ++x3) {
            if (st.used3[x3]) continue;
            if (probe(v, x2, x3)) ok = true;
          }
        }
        if (ok) {
          pools[p].push_back(v);
          cursor = p + 1 > last ? first : p + 1;
        }
      }
      for (int p = first; p <= last; ++p)
        if (pools[p].empty()) return std::nullopt;
    }

    // Inner pools, depth k-1 down to 1. A failed candidate may still qualify
    // for a sibling pool (children differ), so it retries across the depth.
    for (int d = k - 1; d >= 1; --d) {
      const int cap = cap_at_depth(d);
      const int first = 1 << d, last = (1 << (d + 1)) - 1;
      std::vector<char> taken(n, 0);  // per-depth disjointness
      int cursor = first;
      for (int v = 0; v < n; ++v) {
        if (!st.matched[v] || taken[v]) continue;
        for (int step = 0; step <= last - first; ++step) {
          const int p = first + (cursor - first + step) % (last - first + 1);
          if (static_cast<int>(pools[p].size()) >= cap) continue;
          bool ok = false;
          for (std::size_t ai = 0; ai < pools[2 * p].size() && !ok; ++ai) {
            const int a = pools[2 * p][ai];
            if (a == v) continue;
            for (std::size_t bi = 0; bi < pools[2 * p + 1].size() && !ok; ++bi) {
              const int b = pools[2 * p + 1][bi];
              if (b == v) continue;
              if (probe(v, st.sigma[a], st.pi[b])) ok = true;
            }
          }
          if (ok) {
            pools[p].push_back(v);
            taken[v] = 1;
            cursor = p + 1 > last ? first : p + 1;
            break;
          }
        }
        bool all_full = true;
        for (int p = first; p <= last && all_full; ++p)
          all_full = static_cast<int>(pools[p].size()) >= cap;
        if (all_full) break;
      }
      for (int p = first; p <= last; ++p)
        if (pools[p].empty()) return std::nullopt;
    }

    // Top-down extraction.
    AltTree tree(k);
    std::vector<char> usedV(n, 0), usedC2(n, 0), usedC3(n, 0);
    detail::MarkLog log;
    log.set(usedV, i0, 1);

    auto build = [&](auto&& self, int p, int v) -> bool {
      const int depth = std::bit_width(static_cast<unsigned>(p)) - 1;
      if (depth == k) {
        for (int x2 = 0; x2 < n; ++x2) {
          if (st.used2[x2] || usedC2[x2]) continue;
          for (int x3 = 0; x3 < n; ++x3) {
            if (st.used3[x3] || usedC3[x3]) continue;
            if (auto val = probe(v, x2, x3)) {
              log.set(usedC2, x2, 1);
              log.set(usedC3, x3, 1);
              tree.added[p] = {v, x2, x3};
              tree.probed[p] = *val;
              tree.charge[p] = oracle.charge(triple_index(tree.added[p], n), *val);
              tree.removed[p] = {v, st.sigma[v], st.pi[v]};
              return true;
            }
          }
        }
        return false;
      }
      for (int a : pools[2 * p]) {
        if (usedV[a]) continue;
        for (int b : pools[2 * p + 1]) {
          if (usedV[b]) continue;
          const std::size_t snap = log.size();
          if (auto val = probe(v, st.sigma[a], st.pi[b])) {
            log.set(usedV, a, 1);
            log.set(usedV, b, 1);
            if (self(self, 2 * p, a) && self(self, 2 * p + 1, b)) {
              tree.added[p] = {v, st.sigma[a], st.pi[b]};
              tree.probed[p] = *val;
              tree.charge[p] = oracle.charge(triple_index(tree.added[p], n), *val);
              if (p >= 2) tree.removed[p] = {v, st.sigma[v], st.pi[v]};
              return true;
            }
          }
          log.unwind(snap);
        }
      }
      return false;
    };

    if (!build(build, 1, i0)) return std::nullopt;
    return tree;
  } catch (const detail::ProbeBudgetExceeded&) {
    return std::nullopt;
  }
}

// Tree search for the last few indices, where fewer than 2^k unused
// coordinates remain. Same tree shape, different leaf rule: a displaced
// first coordinate keeps the old coordinate its parent did not consume, and
// draws the other from the unused coordinates plus those freed higher up in
// this same tree. Each inner node frees its kept coordinate before its
// children are searched, so one tree consumes exactly one unused 2- and one
// unused 3-coordinate no matter how few remain.
template <SearchCosts O>
std::optional<AltTree> find_final_tree(const PartialState& st, O& oracle, int i0,
                                       double w, int k, const BdtsOptions& opts) {
  const int n = st.n;
  long budget = opts.probe_budget;
  auto probe = [&](int a, int b, int c) -> std::optional<double> {
    if (--budget < 0) throw detail::ProbeBudgetExceeded{};
    auto v = oracle.query(triple_index({a, b, c}, n), w);
    if (v && *v <= w) return v;
    return std::nullopt;
  };

  try {
    AltTree tree(k);
    std::vector<char> usedV(n, 0);
    std::vector<char> avail2(n, 0), avail3(n, 0);
    for (int c = 0; c < n; ++c) {
      avail2[c] = !st.used2[c];
      avail3[c] = !st.used3[c];
    }
    detail::MarkLog log;
    log.set(usedV, i0, 1);

    // lost: which coordinate of v the parent consumed (2 or 3).
    auto build = [&](auto&& self, int p, int v, int lost) -> bool {
      const int depth = std::bit_width(static_cast<unsigned>(p)) - 1;
      tree.removed[p] = {v, st.sigma[v], st.pi[v]};
      if (depth == k) {
        if (lost == 2) {
          for (int x2 = 0; x2 < n; ++x2) {
            if (!avail2[x2]) continue;
            if (auto val = probe(v, x2, st.pi[v])) {
              log.set(avail2, x2, 0);
              tree.added[p] = {v, x2, st.pi[v]};
              tree.probed[p] = *val;
              tree.charge[p] = oracle.charge(triple_index(tree.added[p], n), *val);
              return true;
            }
          }
        } else {
          for (int x3 = 0; x3 < n; ++x3) {
            if (!avail3[x3]) continue;
            if (auto val = probe(v, st.sigma[v], x3)) {
              log.set(avail3, x3, 0);
              tree.added[p] = {v, st.sigma[v], x3};
              tree.probed[p] = *val;
              tree.charge[p] = oracle.charge(triple_index(tree.added[p], n), *val);
              return true;
            }
          }
        }
        return false;
      }
      const std::size_t node_snap = log.size();
      // Free the coordinate this node keeps losing nothing: its replacement
      // takes both plane coordinates from other owners.
      if (lost == 2)
        log.set(avail3, st.pi[v], 1);
      else
        log.set(avail2, st.sigma[v], 1);
      for (int a = 0; a < n; ++a) {
        if (!st.matched[a] || usedV[a]) continue;
        for (int b = 0; b < n; ++b) {
          if (!st.matched[b] || usedV[b] || b == a) continue;
          const std::size_t snap = log.size();
          if (auto val = probe(v, st.sigma[a], st.pi[b])) {
            log.set(usedV, a, 1);
            log.set(usedV, b, 1);
            if (self(self, 2 * p, a, 2) && self(self, 2 * p + 1, b, 3)) {
              tree.added[p] = {v, st.sigma[a], st.pi[b]};
              tree.probed[p] = *val;
              tree.charge[p] = oracle.charge(triple_index(tree.added[p], n), *val);
              return true;
            }
          }
          log.unwind(snap);
        }
      }
      log.unwind(node_snap);
      return false;
    };

    // Root: consumes one used 2-coordinate and one used 3-coordinate.
    for (int a = 0; a < n; ++a) {
      if (!st.matched[a] || usedV[a] || a == i0) continue;
      for (int b = 0; b < n; ++b) {
        if (!st.matched[b] || usedV[b] || b == a || b == i0) continue;
        const std::size_t snap = log.size();
        if (auto val = probe(i0, st.sigma[a], st.pi[b])) {
          log.set(usedV, a, 1);
          log.set(usedV, b, 1);
          if (build(build, 2, a, 2) && build(build, 3, b, 3)) {
            tree.added[1] = {i0, st.sigma[a], st.pi[b]};
            tree.probed[1] = *val;
            tree.charge[1] = oracle.charge(triple_index(tree.added[1], n), *val);
            return tree;
          }
        }
        log.unwind(snap);
      }
    }
    return std::nullopt;
  } catch (const detail::ProbeBudgetExceeded&) {
    return std::nullopt;
  }
}

namespace detail {

// Applies a tree transactionally (all removals, then all additions, both in
// position order) and folds its charges into the per-index account. Returns
// the net cost delta.
inline double apply_tree(PartialState& st, const AltTree& tree,
                         std::vector<double>& committed, BdtsReport& rep,
                         Phase phase, int round, double w_eff, double offset_at,
                         bool keep_trace) {
  const int before = st.matched_count;
  double delta = 0.0;
  for (int p = 2; p <= tree.positions(); ++p) {
    st.remove(tree.removed[p]);
    const double back = committed[tree.removed[p].i];
    committed[tree.removed[p].i] = 0.0;
    delta -= back;
    if (keep_trace)
      rep.trace.push_back({phase, round, tree.removed[p], false, back, 0.0, 0.0});
  }
  for (int p = 1; p <= tree.positions(); ++p) {
    st.add(tree.added[p]);
    committed[tree.added[p].i] = tree.charge[p];
    delta += tree.charge[p];
    if (keep_trace)
      rep.trace.push_back(
          {phase, round, tree.added[p], true, tree.charge[p], offset_at, w_eff});
  }
  if (st.matched_count != before + 1)
    throw std::logic_error("apply_tree: matched count did not grow by one");
  ++rep.augmentations;
  return delta;
}

}  // namespace detail

// Greedy prefix: index by index, take the cheapest triple over the remaining
// 2- and 3-coordinates. The minimum is found by querying every remaining pair
// at a threshold escalating from w0; once anything is exposed, the smallest
// exposed value is the exact minimum because all hidden entries are bounded
// below by the threshold.
template <SearchCosts O>
void greedy_phase(O& oracle, PartialState& st, int n1, double w0, BdtsReport& rep,
                  std::vector<double>* committed = nullptr, bool keep_trace = true) {
  const int n = st.n;
  if (n1 < 0 || n1 > n) throw PreconditionError("greedy_phase: n1 out of range");
  for (int i = 0; i < n1; ++i) {
    double w = w0;
    int bj = -1, bk = -1;
    double bv = 0.0;
    for (int pass = 0;; ++pass) {
      if (pass > 1100) throw std::logic_error("greedy_phase: threshold escalation ran away");
      for (int j = 0; j < n; ++j) {
        if (st.used2[j]) continue;
        for (int k = 0; k < n; ++k) {
          if (st.used3[k]) continue;
          auto v = oracle.query(triple_index({i, j, k}, n), w);
          if (v && *v <= w && (bj < 0 || *v < bv)) {
            bv = *v;
            bj = j;
            bk = k;
          }
        }
      }
      if (bj >= 0) break;
      w *= 2.0;
    }
    const Triple t{i, bj, bk};
    const double charge = oracle.charge(triple_index(t, n), bv);
    st.add(t);
    rep.greedy_cost += charge;
    if (committed) (*committed)[i] = charge;
    if (keep_trace)
      rep.trace.push_back({Phase::Greedy, i, t, true, charge, oracle.offset(), w});
  }
}

// Round structure: before round t the oracle is refreshed by w(t-1), then
// trees with budget w(t) (doubling on failure, up to the escalation cap)
// bring the unmatched count down to the round target. Runs while at least
// 2^k coordinates remain unmatched; the loop naturally extends past t0 with
// the target pinned at 1.
template <SearchCosts O>
void main_phase(PartialState& st, O& oracle, const BdtsSchedule& sched,
                const BdtsOptions& opts, std::vector<double>& committed,
                BdtsReport& rep) {
  const int tree_min = 1 << opts.k;
  int t = 0;
  while (st.unmatched_count() >= tree_min) {
    ++t;
    oracle.refresh(sched.w(t - 1));
    rep.rounds_executed = t;
    const int target = std::max(sched.x_int(t + 1), 1);
    RoundStat rs{t, sched.w(t), 0, 0};
    while (st.unmatched_count() > target && st.unmatched_count() >= tree_min) {
      int i0 = 0;
      while (st.matched[i0]) ++i0;
      double w = sched.w(t);
      int esc = 0;
      for (;;) {
        if (auto tree = find_tree(st, oracle, i0, w, opts.k, opts)) {
          rep.main_cost += detail::apply_tree(st, *tree, committed, rep, Phase::Main,
                                              t, w, oracle.offset(), opts.keep_trace);
          ++rs.augmentations;
          break;
        }
        if (esc >= opts.escalation_cap)
          throw ExhaustedError("main phase: no tree for index " + std::to_string(i0) +
                                   " after " + std::to_string(esc) + " escalations",
                               rep.escalations);
        ++esc;
        ++rs.escalations;
        ++rep.escalations;
        w *= 2.0;
      }
      if (opts.validate_steps && !st.validate())
        throw std::logic_error("main_phase: state invariant violated");
    }
    if (rs.augmentations > 0 || rs.escalations > 0) rep.round_stats.push_back(rs);
  }
}

// Matches the last few indices (fewer than 2^k unmatched) with recycling
// trees, refreshing k times per index at the final-phase budget.
template <SearchCosts O>
void final_phase(PartialState& st, O& oracle, const BdtsSchedule& sched,
                 const BdtsOptions& opts, std::vector<double>& committed,
                 BdtsReport& rep) {
  const double wf = sched.final_w(opts.final_prefactor);
  while (st.matched_count < st.n) {
    int i0 = 0;
    while (st.matched[i0]) ++i0;
    for (int l = 0; l < opts.k; ++l) oracle.refresh(wf);
    double w = wf;
    int esc = 0;
    for (;;) {
      if (auto tree = find_final_tree(st, oracle, i0, w, opts.k, opts)) {
        rep.final_cost += detail::apply_tree(st, *tree, committed, rep, Phase::Final,
                                             i0, w, oracle.offset(), opts.keep_trace);
        break;
      }
      if (esc >= opts.escalation_cap)
        throw ExhaustedError("final phase: no tree for index " + std::to_string(i0) +
                                 " after " + std::to_string(esc) + " escalations",
                             rep.escalations);
      ++esc;
      ++rep.escalations;
      w *= 2.0;
    }
    if (opts.validate_steps && !st.validate())
      throw std::logic_error("final_phase: state invariant violated");
  }
}

struct BdtsResult {
  PlanarAssignment assignment;
  BdtsReport report;
};

// Full three-phase run against any cost model satisfying SearchCosts.
template <SearchCosts O>
BdtsResult run_bdts(O& oracle, const BdtsSchedule& sched, const BdtsOptions& opts) {
  if (oracle.n() != sched.n) throw PreconditionError("run_bdts: oracle and schedule disagree on n");
  if (opts.k != sched.k) throw PreconditionError("run_bdts: options and schedule disagree on k");
  PartialState st(sched.n);
  BdtsReport rep;
  std::vector<double> committed(sched.n, 0.0);

  greedy_phase(oracle, st, sched.n1, sched.w0, rep, &committed, opts.keep_trace);
  main_phase(st, oracle, sched, opts, committed, rep);
  final_phase(st, oracle, sched, opts, committed, rep);

  if (opts.validate_steps && !st.validate())
    throw std::logic_error("run_bdts: final state invalid");
  BdtsResult res{st.to_assignment(), std::move(rep)};
  // Total in ascending index order: a direct re-evaluation of the final
  // assignment sums the same values in the same order.
  double total = 0.0;
  for (int i = 0; i < sched.n; ++i) total += committed[i];
  res.report.total_cost = total;
  return res;
}

inline BdtsResult bdts_distributional(int n, std::uint64_t seed, const BdtsOptions& opts) {
  BdtsSchedule sched = make_schedule(n, opts.k, opts.L);
  RefreshableCosts oracle(n, seed);
  BdtsResult res = run_bdts(oracle, sched, opts);
  res.report.upper_bound_cost = res.report.total_cost;
  return res;
}

inline BdtsResult bdts_fixed(const CostTensor& t, const BdtsOptions& opts) {
  if (t.d() != 3) throw PreconditionError("bdts_fixed: d must be 3");
  BdtsSchedule sched = make_schedule(t.n(), opts.k, opts.L);
  FixedCosts oracle(t);
  return run_bdts(oracle, sched, opts);
}

}  // namespace mdap
