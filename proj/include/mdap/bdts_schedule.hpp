#pragma once

#include <cmath>
#include <vector>

#include "mdap/common.hpp"

namespace mdap {

// Parameter schedule for the k-level tree search heuristic.
//
// theta = 1/(2^{k+1}-1). The greedy prefix matches n1 ~ n - n^{1-theta}
// indices; the remaining x1 = n - n1 are matched in rounds t = 1, 2, ...
// with unmatched target x(t) = beta^{t-1} x1 and per-round budget
// w(t) = 2 x(t)^{-1-theta} n^{theta-1} (ln n)^theta, after a round-0 budget
// w0 = 2 n^{-2(1-theta)} ln n used by the greedy prefix.
//
// x(t) is kept real-valued: the monotonicity of x and w is a property of the
// geometric sequence, and rounding happens only where an integer target is
// consumed (x_int, clamped at 1).
struct BdtsSchedule {
  int n = 0;
  int k = 0;
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double L = 1.0;
  int n1 = 0;  // greedy target
  int x1 = 0;  // n - n1
  double w0 = 0.0;
  int t0 = 0;  // round horizon: x(t0) falls to L

  double x_real(int t) const {
    return std::pow(beta, t - 1) * static_cast<double>(x1);
  }

  int x_int(int t) const {
    const long long r = std::llround(x_real(t));
    return static_cast<int>(std::max(1LL, r));
  }

  double w(int t) const {
    if (t == 0) return w0;
    const double lg = std::log(static_cast<double>(n));
    return 2.0 * std::pow(x_real(t), -1.0 - theta) *
           std::pow(static_cast<double>(n), theta - 1.0) * std::pow(lg, theta);
  }

  // Cumulative budget W(t) = w0 + w(1) + ... + w(t).
  double W(int t) const {
    while (static_cast<int>(cum_.size()) <= t) {
      const int s = static_cast<int>(cum_.size());
      cum_.push_back(s == 0 ? w0 : cum_.back() + w(s));
    }
    return cum_[t];
  }

  // Per-refresh budget of the last phase; the prefactor matches w(t)'s.
  double final_w(double prefactor = 2.0) const {
    const double lg = std::log(static_cast<double>(n));
    return prefactor * std::pow(lg, theta) * std::pow(static_cast<double>(n), theta - 1.0);
  }

 private:
  mutable std::vector<double> cum_;
};

inline BdtsSchedule make_schedule(int n, int k, double L = 1.0) {
  if (n < 4) throw PreconditionError("make_schedule: n must be >= 4");
  if (k < 1) throw PreconditionError("make_schedule: k must be >= 1");
  if (!(L > 0.0)) throw PreconditionError("make_schedule: L must be > 0");

  BdtsSchedule s;
  s.n = n;
  s.k = k;
  s.L = L;
  s.theta = 1.0 / (std::pow(2.0, k + 1) - 1.0);
  const double n_pow = std::pow(static_cast<double>(n), 1.0 - s.theta);
  if (n_pow < 2.0) throw PreconditionError("make_schedule: k too large for n");

  // Tree augmentation removes 2^{k+1}-2 distinct matched indices, so the
  // greedy prefix must provide at least that many.
  const long long min_matched = (1LL << (k + 1)) - 2;
  if (min_matched > n - 1) throw PreconditionError("make_schedule: k too large for n");
  long long n1 = std::llround(static_cast<double>(n) - n_pow);
  n1 = std::max(n1, min_matched);
  n1 = std::min(n1, static_cast<long long>(n - 1));
  s.n1 = static_cast<int>(n1);
  s.x1 = n - s.n1;

  s.alpha = std::pow(2.0, -2.0 * k - 2.0) * (1.0 - std::sqrt(2.0 / 3.0));
  s.beta = 1.0 - s.alpha;
  s.w0 = 2.0 * std::pow(static_cast<double>(n), -2.0 * (1.0 - s.theta)) *
         std::log(static_cast<double>(n));
  if (s.x1 <= L)
    s.t0 = 0;
  else
    s.t0 = static_cast<int>(std::ceil(std::log(s.x1 / L) / -std::log(s.beta)));
  return s;
}

}  // namespace mdap
