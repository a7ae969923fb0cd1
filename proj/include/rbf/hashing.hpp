#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "rbf/common.hpp"

namespace rbf {

using Key = std::array<std::uint8_t, 16>;

/// SipHash-2-4 of the 16-byte little-endian encoding of (a, b).
std::uint64_t keyed_prf(const Key& key, std::uint64_t a, std::uint64_t b) noexcept;

Key random_key(Rng& rng);

/// Fixed, published key used by the public-hash family. Anyone can
/// recompute public indices.
inline constexpr Key kPublicKey = {0x70, 0x75, 0x62, 0x6c, 0x69, 0x63, 0x2d, 0x62,
                                   0x6c, 0x6f, 0x6f, 0x6d, 0x2d, 0x6b, 0x65, 0x79};

enum class HashMode : std::uint8_t { public_hash = 0, keyed_prf = 1, true_random = 2 };

const char* to_string(HashMode mode) noexcept;

/// Source of the k indices of an element.
///
/// public_hash and keyed_prf compute index i of x as keyed_prf(key, i, x) mod m.
/// The modulo bias is below m / 2^64, negligible for any m used here.
/// true_random draws k uniform indices the first time an element is seen and
/// memoizes them; the memo is mutable state, so the family must not be shared
/// across threads while it can still grow.
class HashFamily {
 public:
  static HashFamily public_hash() { return HashFamily(HashMode::public_hash, kPublicKey, 0); }
  static HashFamily keyed(const Key& key) { return HashFamily(HashMode::keyed_prf, key, 0); }
  static HashFamily keyed(Rng& rng) { return keyed(random_key(rng)); }
  static HashFamily true_random(std::uint64_t seed) {
    return HashFamily(HashMode::true_random, Key{}, seed);
  }

  HashMode mode() const noexcept { return mode_; }

  /// Key material; empty for true_random.
  std::span<const std::uint8_t> key() const noexcept {
    if (mode_ == HashMode::true_random) return {};
    return key_;
  }

  /// Writes exactly k indices in [0, m) into `out`.
  void derive(Element x, std::uint64_t m, std::uint32_t k, std::vector<std::uint64_t>& out) const;

  std::vector<std::uint64_t> derive(Element x, std::uint64_t m, std::uint32_t k) const {
    std::vector<std::uint64_t> out;
    derive(x, m, k, out);
    return out;
  }

  std::size_t memo_size() const noexcept { return memo_.size(); }

 private:
  HashFamily(HashMode mode, const Key& key, std::uint64_t seed)
      : mode_(mode), key_(key), rng_(seed) {}

  HashMode mode_;
  Key key_;
  mutable Rng rng_;
  mutable std::unordered_map<Element, std::vector<std::uint64_t>> memo_;
  mutable std::uint64_t memo_m_ = 0;
  mutable std::uint32_t memo_k_ = 0;
};

}  // namespace rbf
