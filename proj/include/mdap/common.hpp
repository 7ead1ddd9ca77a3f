#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mdap {

// Invalid arguments or unsupported sizes detected before any work starts.
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// No perfect matching exists under the structural constraints.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// A search gave up after exhausting its escalation budget.
class ExhaustedError : public std::runtime_error {
 public:
  ExhaustedError(const std::string& what, int escalations_done)
      : std::runtime_error(what), escalations(escalations_done) {}
  int escalations;
};

// Malformed or mismatched instance file.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

struct Triple {
  int i = 0;
  int j = 0;
  int k = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
};

// Flat index of (i,j,k) in a dense n*n*n row-major layout.
inline std::uint64_t triple_index(const Triple& t, int n) {
  return (static_cast<std::uint64_t>(t.i) * n + t.j) * n + t.k;
}

}  // namespace mdap
