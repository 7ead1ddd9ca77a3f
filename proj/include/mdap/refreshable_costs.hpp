#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <optional>
#include <unordered_map>

#include "mdap/common.hpp"
#include "mdap/cost_tensor.hpp"
#include "mdap/exp_random.hpp"

namespace mdap {

// Lazily revealed random Exp(1) cost oracle over the n^3 triple entries.
//
// Logical state per entry is either Exposed(v >= 0) or Hidden(b >= 0), where
// Hidden(b) means "value conditioned to exceed b". refresh(w) shifts every
// entry down by w: Exposed(v > w) -> Exposed(v - w), Exposed(v <= w) -> fresh,
// Hidden(b) -> Hidden(max(b - w, 0)).
//
// Rather than touching every entry on refresh, entries are stored in an
// absolute frame: abs = (logical value or bound) + (cumulative offset at store
// time). A refresh then only bumps the cumulative offset, and an entry whose
// abs has fallen to or below the offset is indistinguishable from fresh, which
// is exactly the wash-and-redraw rule. Spent entries are pruned in amortized
// O(1) per operation.
//
// With a fixed seed the full response sequence is a pure function of the call
// sequence: samples are consumed in query order and pruning consumes none.
class RefreshableCosts {
 public:
  enum class EntryState { Fresh, Hidden, Exposed };

  RefreshableCosts(int n, std::uint64_t seed)
      : n_(n), entry_limit_(CostTensor::entry_count(n, 3)), rng_(seed) {
    if (n < 1) throw PreconditionError("RefreshableCosts: n must be >= 1");
  }

  int n() const { return n_; }

  // Cumulative refresh offset (the sum of all refresh amounts so far).
  double offset() const { return offset_; }

  // Exposed(v) is returned as the value; AboveThreshold as nullopt.
  // A stored exposure is returned as-is even when it exceeds w; callers that
  // need v <= w must check. A hidden bound b < w triggers a memoryless
  // conditional draw v = b + Exp(1), exposing on v <= w and tightening the
  // bound to w otherwise.
  std::optional<double> query(std::uint64_t e, double w) {
    if (e >= entry_limit_) throw PreconditionError("RefreshableCosts: entry out of range");
    if (!(w >= 0.0)) throw PreconditionError("RefreshableCosts: threshold must be >= 0");
    double base = 0.0;
    const auto it = map_.find(e);
    if (it != map_.end()) {
      if (it->second.exposed) {
        const double v = it->second.abs - offset_;
        if (v > 0.0) return v;
      } else {
        base = std::max(it->second.abs - offset_, 0.0);
      }
    }
    if (base >= w) return std::nullopt;
    const double v = base + rng_();
    if (v <= w) {
      map_[e] = Entry{true, v + offset_};
      return v;
    }
    map_[e] = Entry{false, w + offset_};
    return std::nullopt;
  }

  void refresh(double w) {
    if (!(w >= 0.0)) throw PreconditionError("RefreshableCosts: refresh amount must be >= 0");
    offset_ += w;
    if (map_.size() >= prune_at_) prune();
  }

  // Accounting value of a committed entry: the exposed value plus the offset
  // in force when it was consumed. Constant across later refreshes, and an
  // upper bound on the entry's realized cost while the exposure survives.
  double charge(std::uint64_t, double probed) const { return probed + offset_; }

  // State inspection, mainly for tests.
  EntryState state(std::uint64_t e) const {
    const auto it = map_.find(e);
    if (it == map_.end()) return EntryState::Fresh;
    if (it->second.exposed)
      return it->second.abs - offset_ > 0.0 ? EntryState::Exposed : EntryState::Fresh;
    return it->second.abs - offset_ > 0.0 ? EntryState::Hidden : EntryState::Fresh;
  }

  // Current exposed value, if this entry is in the Exposed state.
  std::optional<double> exposed_value(std::uint64_t e) const {
    const auto it = map_.find(e);
    if (it == map_.end() || !it->second.exposed) return std::nullopt;
    const double v = it->second.abs - offset_;
    if (v > 0.0) return v;
    return std::nullopt;
  }

  // Current hidden lower bound (0 for fresh entries).
  double hidden_bound(std::uint64_t e) const {
    const auto it = map_.find(e);
    if (it == map_.end() || it->second.exposed) return 0.0;
    return std::max(it->second.abs - offset_, 0.0);
  }

  std::size_t stored_entries() const { return map_.size(); }

 private:
  struct Entry {
    bool exposed;
    double abs;
  };

  void prune() {
    for (auto it = map_.begin(); it != map_.end();) {
      if (it->second.abs <= offset_)
        it = map_.erase(it);
      else
        ++it;
    }
    prune_at_ = std::max<std::size_t>(1024, 2 * map_.size());
  }

  int n_;
  std::uint64_t entry_limit_;
  double offset_ = 0.0;
  ExpSampler rng_;
  std::unordered_map<std::uint64_t, Entry> map_;
  std::size_t prune_at_ = 1024;
};

// The same oracle surface over a concrete tensor. query accepts an entry when
// its actual cost minus the cumulative refresh budget is at or below the
// threshold, i.e. actual cost <= cumulative budget so far plus w. charge
// reports the actual cost exactly, so totals reproduce a direct re-evaluation
// of the final assignment bit for bit.
class FixedCosts {
 public:
  explicit FixedCosts(const CostTensor& t) : t_(&t) {
    if (t.d() != 3) throw PreconditionError("FixedCosts: d must be 3");
  }

  int n() const { return t_->n(); }
  double offset() const { return cum_; }

  std::optional<double> query(std::uint64_t e, double w) const {
    const double v = t_->flat(e) - cum_;
    if (v <= w) return v;
    return std::nullopt;
  }

  void refresh(double w) {
    if (!(w >= 0.0)) throw PreconditionError("FixedCosts: refresh amount must be >= 0");
    cum_ += w;
  }

  double charge(std::uint64_t e, double) const { return t_->flat(e); }

 private:
  const CostTensor* t_;
  double cum_ = 0.0;
};

// What the search phases need from a cost model. Both modes above satisfy it,
// so every driver is written once and runs identically against either.
template <typename O>
concept SearchCosts = requires(O o, std::uint64_t e, double w) {
  { o.n() } -> std::convertible_to<int>;
  { o.query(e, w) } -> std::same_as<std::optional<double>>;
  { o.refresh(w) };
  { o.offset() } -> std::convertible_to<double>;
  { o.charge(e, w) } -> std::convertible_to<double>;
};

}  // namespace mdap
