#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mdap {

// SplitMix64 output function, used as a 64-bit mixer for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-trial seed: a fixed mixing of (master seed, problem size, trial index).
// This mapping is part of the output format contract and must never change,
// so that results are reproducible regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n, std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(master) ^ n) ^ trial);
}

// Deterministic Exp(1) sampler by inverse CDF.
//
// The uniform is built as ((x >> 11) + 0.5) * 2^-53, which lies strictly
// inside (0,1), so -log1p(-u) is always finite and strictly positive.
class ExpSampler {
 public:
  explicit ExpSampler(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    const std::uint64_t x = gen_();
    const double u = (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    return -std::log1p(-u);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mdap
