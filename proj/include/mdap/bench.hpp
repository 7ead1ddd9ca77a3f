#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mdap/axial.hpp"
#include "mdap/bdts.hpp"
#include "mdap/bilinear.hpp"
#include "mdap/common.hpp"
#include "mdap/cost_tensor.hpp"
#include "mdap/exp_random.hpp"
#include "mdap/matching.hpp"

namespace mdap {

struct TrialRecord {
  std::string algo;
  int n = 0;
  int k = -1;  // -1 when the algorithm has no k
  std::uint64_t seed = 0;
  int trial = 0;
  double cost = std::numeric_limits<double>::quiet_NaN();
  double cost_upper = std::numeric_limits<double>::quiet_NaN();
  double runtime_ms = 0.0;
  int escalations = 0;

  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    auto eq = [](double x, double y) {
      return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return a.algo == b.algo && a.n == b.n && a.k == b.k && a.seed == b.seed &&
           a.trial == b.trial && eq(a.cost, b.cost) && eq(a.cost_upper, b.cost_upper) &&
           eq(a.runtime_ms, b.runtime_ms) && a.escalations == b.escalations;
  }
};

struct ExperimentConfig {
  std::string algo;     // planar-bdts | axial-greedy | bilinear | matching
  std::vector<int> ns;  // sorted and deduplicated by run_trials
  int k = 1;
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::string mode = "distributional";  // planar-bdts only: distributional | fixed
  int escalation_cap = 8;
  int jobs = 0;  // 0 = hardware concurrency
  int max_iters = 100;
  // Timing is the one nondeterministic field; suppress it when outputs must
  // be byte-identical across runs.
  bool record_timing = true;
};

namespace detail {

inline TrialRecord run_one_trial(const ExperimentConfig& cfg, int n, int trial) {
  TrialRecord rec;
  rec.algo = cfg.algo;
  rec.n = n;
  rec.trial = trial;
  rec.seed = derive_seed(cfg.master_seed, n, trial);
  const auto started = std::chrono::steady_clock::now();
  if (cfg.algo == "planar-bdts") {
    rec.k = cfg.k;
    BdtsOptions opts;
    opts.k = cfg.k;
    opts.escalation_cap = cfg.escalation_cap;
    opts.keep_trace = false;
    try {
      if (cfg.mode == "distributional") {
        BdtsResult r = bdts_distributional(n, rec.seed, opts);
        rec.cost = r.report.total_cost;
        rec.cost_upper = r.report.upper_bound_cost;
        rec.escalations = r.report.escalations;
      } else if (cfg.mode == "fixed") {
        CostTensor t = CostTensor::sample(n, 3, rec.seed);
        BdtsResult r = bdts_fixed(t, opts);
        rec.cost = r.report.total_cost;
        rec.escalations = r.report.escalations;
      } else {
        throw PreconditionError("run_trials: mode must be distributional or fixed");
      }
    } catch (const ExhaustedError& e) {
      rec.cost = std::numeric_limits<double>::quiet_NaN();
      rec.cost_upper = std::numeric_limits<double>::quiet_NaN();
      rec.escalations = e.escalations;
    }
  } else if (cfg.algo == "axial-greedy") {
    AxialResult r = axial_greedy(CostTensor::sample(n, 3, rec.seed));
    rec.cost = r.report.total;
  } else if (cfg.algo == "bilinear") {
    CostTensor t = CostTensor::sample(n, 3, rec.seed);
    auto id = identity_permutation(n);
    BilinearResult r = bilinear_alternate(t, id, id, cfg.max_iters);
    rec.cost = r.final.value;
  } else if (cfg.algo == "matching") {
    CostTensor t = CostTensor::sample(n, 2, rec.seed);
    rec.cost = min_cost_matching(MatchMatrix::from_flat(n, t.costs())).cost;
  } else {
    throw PreconditionError("run_trials: unknown algorithm '" + cfg.algo + "'");
  }
  if (cfg.record_timing) {
    const auto stopped = std::chrono::steady_clock::now();
    rec.runtime_ms =
        std::chrono::duration<double, std::milli>(stopped - started).count();
  }
  return rec;
}

}  // namespace detail

// Runs trials ns x trials in a worker pool. Each trial's seed depends only on
// (master_seed, n, trial) and records land in preassigned slots, so the
// result is identical for any job count and any completion order. on_record,
// if given, fires once per completed trial (unordered, serialized).
inline std::vector<TrialRecord> run_trials(
    const ExperimentConfig& cfg,
    const std::function<void(const TrialRecord&)>& on_record = nullptr) {
  if (cfg.trials < 1) throw PreconditionError("run_trials: trials must be >= 1");
  if (cfg.ns.empty()) throw PreconditionError("run_trials: need at least one n");
  std::vector<int> ns = cfg.ns;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.front() < 1) throw PreconditionError("run_trials: n must be >= 1");

  const std::size_t total = ns.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::mutex emit_mutex;
  std::exception_ptr failure;
  std::atomic<bool> stop{false};

  int jobs = cfg.jobs;
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::clamp<int>(jobs, 1, static_cast<int>(total));

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total || stop.load()) return;
      const int n = ns[idx / cfg.trials];
      const int trial = static_cast<int>(idx % cfg.trials);
      try {
        records[idx] = detail::run_one_trial(cfg, n, trial);
        if (on_record) {
          std::lock_guard<std::mutex> lock(emit_mutex);
          on_record(records[idx]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(emit_mutex);
        if (!failure) failure = std::current_exception();
        stop.store(true);
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  // Slot layout is already (n ascending, trial ascending).
  return records;
}

// ---- serialization ----

// Shortest decimal that parses back to the same double; NaN spelled "nan".
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw FormatError("bad numeric field '" + s + "'");
  return v;
}

inline const char* kCsvHeader = "algo,n,k,seed,trial,cost,cost_upper,runtime_ms,escalations";

inline void write_csv(std::ostream& os, const std::vector<TrialRecord>& recs) {
  os << kCsvHeader << '\n';
  for (const auto& r : recs) {
    os << r.algo << ',' << r.n << ',';
    if (r.k >= 0) os << r.k;
    os << ',' << r.seed << ',' << r.trial << ',' << format_double(r.cost) << ','
       << format_double(r.cost_upper) << ',' << format_double(r.runtime_ms) << ','
       << r.escalations << '\n';
  }
}

inline std::vector<TrialRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw FormatError("missing or wrong CSV header");
  std::vector<TrialRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        f.push_back(line.substr(start));
        break;
      }
      f.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (f.size() != 9) throw FormatError("CSV row needs 9 fields");
    TrialRecord r;
    r.algo = f[0];
    r.n = static_cast<int>(parse_double(f[1]));
    r.k = f[2].empty() ? -1 : static_cast<int>(parse_double(f[2]));
    r.seed = std::stoull(f[3]);
    r.trial = static_cast<int>(parse_double(f[4]));
    r.cost = parse_double(f[5]);
    r.cost_upper = parse_double(f[6]);
    r.runtime_ms = parse_double(f[7]);
    r.escalations = static_cast<int>(parse_double(f[8]));
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_jsonl(std::ostream& os, const std::vector<TrialRecord>& recs) {
  for (const auto& r : recs) {
    nlohmann::json j;
    j["algo"] = r.algo;
    j["n"] = r.n;
    if (r.k >= 0)
      j["k"] = r.k;
    else
      j["k"] = nullptr;
    j["seed"] = r.seed;
    j["trial"] = r.trial;
    j["cost"] = std::isnan(r.cost) ? nlohmann::json{} : nlohmann::json(r.cost);
    j["cost_upper"] =
        std::isnan(r.cost_upper) ? nlohmann::json{} : nlohmann::json(r.cost_upper);
    j["runtime_ms"] = r.runtime_ms;
    j["escalations"] = r.escalations;
    os << j.dump() << '\n';
  }
}

// ---- scaling fits ----

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log-space residuals
};

// Least squares of y = slope * x + intercept over (ln n, ln mean) points.
inline FitResult fit_power_law(const std::vector<std::pair<double, double>>& n_mean) {
  if (n_mean.size() < 3)
    throw PreconditionError("fit_power_law: need at least 3 points");
  std::vector<double> xs, ys;
  for (const auto& [n, m] : n_mean) {
    if (!(n > 0.0) || !(m > 0.0))
      throw PreconditionError("fit_power_law: points must be positive");
    xs.push_back(std::log(n));
    ys.push_back(std::log(m));
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw PreconditionError("fit_power_law: degenerate x values");
  FitResult fit;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

// Groups records by n, averages the finite costs, and fits log mean cost
// against log n. Trials that ended Exhausted (NaN cost) are skipped.
inline FitResult fit_scaling(const std::vector<TrialRecord>& recs) {
  std::map<int, std::pair<double, int>> groups;
  for (const auto& r : recs) {
    if (std::isnan(r.cost)) continue;
    auto& [sum, cnt] = groups[r.n];
    sum += r.cost;
    ++cnt;
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& [n, sc] : groups)
    pts.emplace_back(static_cast<double>(n), sc.first / sc.second);
  if (pts.size() < 3)
    throw PreconditionError("fit_scaling: need at least 3 distinct n with finite costs");
  return fit_power_law(pts);
}

}  // namespace mdap
