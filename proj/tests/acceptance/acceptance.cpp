// Release gate: ten end-to-end checks, one test each, printing a single
// [PASS]/[FAIL] summary line with the measured numbers. Statistical checks
// run at fixed seeds so reruns are exactly reproducible; tolerances are wide
// relative to sampling noise at these sizes.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "mdap/mdap.hpp"

namespace mdap {
namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void line(int criterion, bool ok, const char* fmt, ...) {
  char detail[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(detail, sizeof detail, fmt, args);
  va_end(args);
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail);
  std::fflush(stdout);
}

TEST(Acceptance, C01_MatchingMeanMatchesReference) {
  Stopwatch timer;
  const int trials = 300;
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    CostTensor m = CostTensor::sample(10, 2, derive_seed(101, 10, t));
    sum += min_cost_matching(MatchMatrix::from_flat(10, m.costs())).cost;
  }
  const double mean = sum / trials;
  const double ref = 1.549768;
  const double secs = timer.seconds();
  const bool ok = std::abs(mean - ref) <= 0.05 * ref && secs < 10.0;
  line(1, ok, "n=10 matching mean %.6f vs %.6f +-5%% over %d trials, %.1fs",
       mean, ref, trials, secs);
  EXPECT_NEAR(mean, ref, 0.05 * ref);
  EXPECT_LT(secs, 10.0);
}

TEST(Acceptance, C02_MatchingAgreesWithBruteForce) {
  Stopwatch timer;
  const int trials = 500;
  int mismatches = 0;
  for (int t = 0; t < trials; ++t) {
    const int n = 2 + static_cast<int>(splitmix64(1000 + t) % 5);
    CostTensor m = CostTensor::sample(n, 2, derive_seed(202, n, t));
    MatchMatrix mat = MatchMatrix::from_flat(n, m.costs());
    const double fast = min_cost_matching(mat).cost;
    const double slow = brute_force_matching(mat).cost;
    if (fast != slow) ++mismatches;
    EXPECT_EQ(fast, slow) << "trial " << t << " n " << n;
  }
  const double secs = timer.seconds();
  const bool ok = mismatches == 0 && secs < 5.0;
  line(2, ok, "%d random n<=6 instances, %d mismatches vs brute force, %.1fs",
       trials, mismatches, secs);
  EXPECT_EQ(mismatches, 0);
  EXPECT_LT(secs, 5.0);
}

TEST(Acceptance, C03_AxialSliceMeansUnderBound) {
  Stopwatch timer;
  const int n = 20, trials = 100;
  std::vector<double> slice_sum(n, 0.0);
  for (int t = 0; t < trials; ++t) {
    AxialResult res = axial_greedy(CostTensor::sample(n, 3, derive_seed(303, n, t)));
    for (int i = 0; i < n; ++i) slice_sum[i] += res.report.slice_cost[i];
  }
  double worst_ratio = 0.0;
  int violations = 0;
  for (int i = 0; i < n; ++i) {
    const double mean = slice_sum[i] / trials;
    const double cap = 1.25 * dfm_slice_bound(i + 1, n);
    worst_ratio = std::max(worst_ratio, mean / cap);
    if (mean > cap) ++violations;
    EXPECT_LE(mean, cap) << "slice " << i + 1;
  }
  const double secs = timer.seconds();
  const bool ok = violations == 0 && secs < 30.0;
  line(3, ok, "n=20 slice means vs 1.25x 2n/(n-i+1): worst ratio %.3f, %d over, %.1fs",
       worst_ratio, violations, secs);
  EXPECT_EQ(violations, 0);
  EXPECT_LT(secs, 30.0);
}

TEST(Acceptance, C04_AxialTotalRate) {
  Stopwatch timer;
  ExperimentConfig cfg;
  cfg.algo = "axial-greedy";
  cfg.ns = {15, 30, 60};
  cfg.trials = 50;
  cfg.master_seed = 404;
  cfg.record_timing = false;
  std::vector<TrialRecord> recs = run_trials(cfg);

  std::map<int, double> mean;
  for (const auto& r : recs) mean[r.n] += r.cost / cfg.trials;
  bool bounds_ok = true;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [n, m] : mean) {
    const double upper = 1.15 * 2.0 * n * harmonic(n);
    const double lower = 0.9 * n * kZeta2;
    if (!(m <= upper && m >= lower)) bounds_ok = false;
    EXPECT_LE(m, upper) << "n " << n;
    EXPECT_GE(m, lower) << "n " << n;
    pts.emplace_back(n, m);
  }
  const double slope = fit_power_law(pts).slope;
  const double secs = timer.seconds();
  const bool slope_ok = slope >= 1.0 && slope <= 1.25;
  // At n in {15,30,60} the n*log n growth still carries its log factor: the
  // local exponent is about 1 + 1/ln n, near 1.3 here, and drops into the
  // stated window only around n >= 100. Reported as measured.
  const bool ok = bounds_ok && slope_ok && secs < 300.0;
  line(4, ok,
       "means n15 %.2f n30 %.2f n60 %.2f (bounds %s), log-log slope %.4f vs "
       "[1.00,1.25], %.1fs",
       mean[15], mean[30], mean[60], bounds_ok ? "ok" : "VIOLATED", slope, secs);
  EXPECT_GE(slope, 1.0);
  EXPECT_LE(slope, 1.25);
  EXPECT_LT(secs, 300.0);
}

TEST(Acceptance, C05_SandwichOnTinyInstances) {
  Stopwatch timer;
  const int trials = 100;
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    {
      CostTensor a = CostTensor::sample(3, 3, derive_seed(505, 3, t));
      const double lb = axial_lower_bound(a);
      const double best = exact_axial(a).cost;
      const double heur = axial_greedy(a).report.total;
      if (!(lb <= best + 1e-12 && best <= heur + 1e-12)) ++bad;
      EXPECT_LE(lb, best + 1e-12) << "axial trial " << t;
      EXPECT_LE(best, heur + 1e-12) << "axial trial " << t;
    }
    {
      CostTensor p = CostTensor::sample(4, 3, derive_seed(505, 4, t));
      const double lb = planar_row_min_lower_bound(p);
      PlanarSolution direct = exact_planar(p);
      PlanarSolution hybrid = exact_planar_hybrid(p);
      EXPECT_EQ(direct.cost, hybrid.cost) << "planar trial " << t;
      BdtsOptions opts;
      opts.keep_trace = false;
      const double tree = bdts_fixed(p, opts).report.total_cost;
      const double alt =
          bilinear_alternate(p, identity_permutation(4), identity_permutation(4))
              .final.value;
      if (!(lb <= direct.cost + 1e-12 && direct.cost <= tree + 1e-12 &&
            direct.cost <= alt + 1e-12 && direct.cost == hybrid.cost))
        ++bad;
      EXPECT_LE(lb, direct.cost + 1e-12) << "planar trial " << t;
      EXPECT_LE(direct.cost, tree + 1e-12) << "planar trial " << t;
      EXPECT_LE(direct.cost, alt + 1e-12) << "planar trial " << t;
    }
  }
  const double secs = timer.seconds();
  const bool ok = bad == 0 && secs < 60.0;
  line(5, ok,
       "%d axial n=3 + %d planar n=4 sandwiches, dual exact routes agree, %d "
       "violations, %.1fs",
       trials, trials, bad, secs);
  EXPECT_EQ(bad, 0);
  EXPECT_LT(secs, 60.0);
}

TEST(Acceptance, C06_TreeSearchFeasibilityAndAccounting) {
  Stopwatch timer;
  int runs = 0, bad = 0;
  for (int n : {30, 60}) {
    for (int k : {1, 2}) {
      for (int s = 0; s < 30; ++s) {
        CostTensor t = CostTensor::sample(n, 3, derive_seed(600 + k, n, s));
        BdtsOptions opts;
        opts.k = k;
        opts.keep_trace = false;
        BdtsResult res = bdts_fixed(t, opts);
        ++runs;
        const bool valid = res.assignment.valid();
        const double re = planar_cost(t, res.assignment);
        const bool exact_total = std::abs(res.report.total_cost - re) <= 1e-9 * n;
        const bool above_lb =
            res.report.total_cost >= planar_row_min_lower_bound(t) - 1e-12;
        if (!(valid && exact_total && above_lb)) ++bad;
        EXPECT_TRUE(valid) << "n " << n << " k " << k << " seed " << s;
        EXPECT_NEAR(res.report.total_cost, re, 1e-9 * n)
            << "n " << n << " k " << k << " seed " << s;
        EXPECT_TRUE(above_lb) << "n " << n << " k " << k << " seed " << s;
      }
    }
  }
  const double secs = timer.seconds();
  const bool ok = bad == 0 && secs < 300.0;
  line(6, ok,
       "%d fixed-mode runs (n in {30,60}, k in {1,2}): valid assignments, cost == "
       "re-evaluation, >= row-min bound, %d bad, %.1fs",
       runs, bad, secs);
  EXPECT_EQ(bad, 0);
  EXPECT_LT(secs, 300.0);
}

TEST(Acceptance, C07_TreeSearchCostRate) {
  Stopwatch timer;
  ExperimentConfig cfg;
  cfg.algo = "planar-bdts";
  cfg.ns = {30, 60, 120};
  cfg.k = 1;
  cfg.trials = 30;
  cfg.master_seed = 707;
  cfg.record_timing = false;
  std::vector<TrialRecord> recs = run_trials(cfg);

  int exhausted = 0;
  std::map<int, double> mean;
  for (const auto& r : recs) {
    if (std::isnan(r.cost))
      ++exhausted;
    else
      mean[r.n] += r.cost / cfg.trials;
  }
  const double slope = fit_scaling(recs).slope;
  const double fail_rate = static_cast<double>(exhausted) / recs.size();
  const double secs = timer.seconds();
  const bool ok =
      slope >= -1.0 && slope <= -0.35 && fail_rate <= 0.02 && secs < 600.0;
  line(7, ok,
       "means n30 %.4f n60 %.4f n120 %.4f, slope %.4f vs [-1.00,-0.35], "
       "exhausted %d/%zu, %.1fs",
       mean[30], mean[60], mean[120], slope, exhausted, recs.size(), secs);
  EXPECT_GE(slope, -1.0);
  EXPECT_LE(slope, -0.35);
  EXPECT_LE(fail_rate, 0.02);
  EXPECT_LT(secs, 600.0);
}

TEST(Acceptance, C08_FirstPhaseCostBound) {
  Stopwatch timer;
  const int n = 100, trials = 100;
  BdtsSchedule sched = make_schedule(n, 1);
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    RefreshableCosts oracle(n, derive_seed(808, n, t));
    PartialState st(n);
    BdtsReport rep;
    greedy_phase(oracle, st, sched.n1, sched.w0, rep, nullptr, false);
    sum += rep.greedy_cost;
  }
  const double mean = sum / trials;
  const double cap = 1.25 * 2.0 / std::pow(n, 2.0 / 3.0);
  const double secs = timer.seconds();
  const bool ok = mean <= cap && secs < 30.0;
  line(8, ok, "n=100 greedy prefix mean cost %.5f vs cap %.5f, %.1fs", mean, cap,
       secs);
  EXPECT_LE(mean, cap);
  EXPECT_LT(secs, 30.0);
}

TEST(Acceptance, C09_RefreshMemorylessness) {
  Stopwatch timer;
  const int n = 24;
  const double w = 2.0;
  RefreshableCosts oracle(n, 909);
  const std::uint64_t entries = static_cast<std::uint64_t>(n) * n * n;
  std::vector<std::uint64_t> exposed;
  for (std::uint64_t e = 0; e < entries; ++e)
    if (oracle.query(e, w)) exposed.push_back(e);
  ASSERT_GE(exposed.size(), 10000u);
  oracle.refresh(w);  // washes every exposure at or below w back to fresh
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::uint64_t e : exposed) {
    if (auto v = oracle.query(e, 50.0)) {
      sum += *v;
      ++cnt;
    }
  }
  ASSERT_GE(cnt, 10000u);
  const double mean = sum / cnt;
  const double secs = timer.seconds();
  const bool ok = mean >= 0.95 && mean <= 1.05 && secs < 5.0;
  line(9, ok, "%zu re-exposed entries, mean %.4f vs [0.95,1.05], %.1fs", cnt, mean,
       secs);
  EXPECT_GE(mean, 0.95);
  EXPECT_LE(mean, 1.05);
  EXPECT_LT(secs, 5.0);
}

TEST(Acceptance, C10_AlternatingDescentProperties) {
  Stopwatch timer;
  const int trials = 100;
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    CostTensor c = CostTensor::sample(4, 3, derive_seed(1010, 4, t));
    BilinearResult r = bilinear_alternate(c, identity_permutation(4),
                                          identity_permutation(4), 50);
    bool good = r.converged && r.final.iteration <= 50;
    for (std::size_t s = 1; s < r.trace.size(); ++s)
      if (r.trace[s] > r.trace[s - 1]) good = false;
    const double best = exact_planar(c).cost;
    if (r.final.value < best - 1e-12) good = false;
    if (solve_fixed_z(c, r.final.z).second != r.final.value) good = false;
    if (solve_fixed_y(c, r.final.y).second != r.final.value) good = false;
    if (!good) ++bad;
    EXPECT_TRUE(good) << "trial " << t;
  }
  const double secs = timer.seconds();
  const bool ok = bad == 0 && secs < 30.0;
  line(10, ok,
       "%d n=4 runs: monotone trace, <=50 iterations, final >= exact, two-block "
       "fixed point, %d bad, %.1fs",
       trials, bad, secs);
  EXPECT_EQ(bad, 0);
  EXPECT_LT(secs, 30.0);
}

}  // namespace
}  // namespace mdap
