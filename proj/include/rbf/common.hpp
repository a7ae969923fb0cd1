#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rbf {

using Element = std::uint64_t;
using ElementSet = std::set<Element>;
using Rng = std::mt19937_64;

/// Raised when an element lies outside the configured universe.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Raised for invalid construction or experiment parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation is not supported by a filter kind.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The integer universe {0, ..., size - 1}.
struct Universe {
  std::uint64_t size = 1;

  explicit Universe(std::uint64_t u) : size(u) {
    if (u == 0) throw ParameterError("universe size must be >= 1");
  }

  bool contains(Element x) const noexcept { return x < size; }

  void check(Element x) const {
    if (!contains(x)) {
      throw DomainError("element " + std::to_string(x) +
                        " outside universe of size " + std::to_string(size));
    }
  }

  void check(const ElementSet& s) const {
    if (!s.empty()) check(*s.rbegin());
  }
};

/// Sizing of a bit-array filter.
struct FilterParams {
  std::uint64_t m = 1;  // bits
  std::uint32_t k = 1;  // hash functions
  std::uint64_t n = 0;  // intended cardinality
  std::optional<double> epsilon;

  void validate() const;

  /// Derives m from (n, epsilon) and k via optimal_k.
  static FilterParams for_target(std::uint64_t n, double epsilon);
};

/// k = (m/n) ln 2 rounded to nearest, clamped to at least 1. n = 0 gives 1.
std::uint32_t optimal_k(std::uint64_t m, std::uint64_t n);

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-trial seed as a pure function of (master seed, tag, index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(mix64(master) ^ tag) + index);
}

/// FNV-1a, used to turn experiment names into seed tags.
constexpr std::uint64_t tag_of(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Uniform integer in [0, bound).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

/// Uniform subset of `count` elements from [0, u) avoiding `exclude`.
ElementSet sample_distinct(Rng& rng, const Universe& universe, std::uint64_t count,
                           const ElementSet& exclude = {});

}  // namespace rbf
