#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mdap/common.hpp"
#include "mdap/exp_random.hpp"

namespace mdap {

// Dense d-dimensional cost array with side n, flat row-major layout:
// index of (i_1,...,i_d) = ((i_1*n + i_2)*n + ...)*n + i_d, 0-based.
class CostTensor {
 public:
  // Guard against accidentally enormous allocations; 2^26 doubles is 512 MiB.
  static constexpr std::uint64_t kMaxEntries = 1ULL << 26;

  CostTensor(int d, int n, std::vector<double> costs,
             std::optional<std::uint64_t> seed = std::nullopt)
      : d_(d), n_(n), costs_(std::move(costs)), seed_(seed) {
    if (d_ < 2) throw PreconditionError("CostTensor: d must be >= 2");
    if (n_ < 1) throw PreconditionError("CostTensor: n must be >= 1");
    if (costs_.size() != entry_count(n_, d_))
      throw PreconditionError("CostTensor: costs length != n^d");
    for (double c : costs_)
      if (!(c >= 0.0) || !std::isfinite(c))
        throw PreconditionError("CostTensor: entries must be finite and >= 0");
  }

  static std::uint64_t entry_count(int n, int d) {
    std::uint64_t total = 1;
    for (int r = 0; r < d; ++r) {
      if (total > kMaxEntries / static_cast<std::uint64_t>(n))
        throw PreconditionError("CostTensor: n^d exceeds capacity limit");
      total *= static_cast<std::uint64_t>(n);
    }
    return total;
  }

  // i.i.d. Exp(1) entries in flat index order from a deterministic generator.
  static CostTensor sample(int n, int d, std::uint64_t seed) {
    if (d < 2) throw PreconditionError("sample: d must be >= 2");
    if (n < 1) throw PreconditionError("sample: n must be >= 1");
    const std::uint64_t total = entry_count(n, d);
    std::vector<double> costs(total);
    ExpSampler exp(seed);
    for (auto& c : costs) c = exp();
    return CostTensor(d, n, std::move(costs), seed);
  }

  int d() const { return d_; }
  int n() const { return n_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  const std::vector<double>& costs() const { return costs_; }
  std::uint64_t size() const { return costs_.size(); }

  double flat(std::uint64_t e) const { return costs_[e]; }

  // d=3 accessor, the common case.
  double operator()(int i, int j, int k) const {
    return costs_[(static_cast<std::uint64_t>(i) * n_ + j) * n_ + k];
  }

  // d=2 accessor.
  double operator()(int i, int j) const {
    return costs_[static_cast<std::uint64_t>(i) * n_ + j];
  }

  void save(std::ostream& os) const {
    nlohmann::json j;
    j["format"] = "mdap-instance-v1";
    j["d"] = d_;
    j["n"] = n_;
    if (seed_)
      j["seed"] = *seed_;
    else
      j["seed"] = nullptr;
    j["costs"] = costs_;
    os << j.dump() << '\n';
  }

  void save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open for writing: " + path);
    save(os);
  }

  static CostTensor load(std::istream& is) {
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("instance parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("format") || !j["format"].is_string())
      throw FormatError("instance file missing format tag");
    if (j["format"].get<std::string>() != "mdap-instance-v1")
      throw FormatError("unsupported instance format: " + j["format"].get<std::string>());
    if (!j.contains("d") || !j.contains("n") || !j.contains("costs"))
      throw FormatError("instance file missing d, n, or costs");
    const int d = j["d"].get<int>();
    const int n = j["n"].get<int>();
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j["seed"].is_null()) seed = j["seed"].get<std::uint64_t>();
    std::vector<double> costs;
    try {
      costs = j["costs"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("instance costs malformed: ") + e.what());
    }
    if (d < 2 || n < 1) throw FormatError("instance has invalid d or n");
    if (costs.size() != entry_count(n, d))
      throw FormatError("instance costs length != n^d");
    try {
      return CostTensor(d, n, std::move(costs), seed);
    } catch (const PreconditionError& e) {
      throw FormatError(std::string("instance invalid: ") + e.what());
    }
  }

  static CostTensor load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open: " + path);
    return load(is);
  }

 private:
  int d_;
  int n_;
  std::vector<double> costs_;
  std::optional<std::uint64_t> seed_;
};

}  // namespace mdap
