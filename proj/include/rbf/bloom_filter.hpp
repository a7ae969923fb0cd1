#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rbf/bit_array.hpp"
#include "rbf/common.hpp"
#include "rbf/hashing.hpp"
#include "rbf/prp.hpp"

namespace rbf {

enum class FilterKind : std::uint8_t { standard = 0, prf_backed = 1, ny_prp_wrapped = 2 };

const char* to_string(FilterKind kind) noexcept;

/// Oracle-facing view of an insertable, steady filter: membership query,
/// insertion, and a dump of the internal representation.
class Filter {
 public:
  virtual ~Filter() = default;

  virtual bool query(Element x) const = 0;
  virtual void insert(Element x) = 0;
  /// The representation as an adversary with state access would see it.
  virtual std::vector<std::uint8_t> reveal() const = 0;
  virtual const BitArray& bits() const = 0;
};

/// Bit-array Bloom filter over an integer universe.
///
/// The kind follows from the hash family: public hashing gives a standard
/// filter, keyed or truly random hashing a PRF-backed one.
class BloomFilter final : public Filter {
 public:
  BloomFilter(FilterParams params, Universe universe, HashFamily hash);

  static BloomFilter build(const ElementSet& s, const FilterParams& params,
                           const Universe& universe, HashFamily hash);

  bool query(Element x) const override;
  void insert(Element x) override;
  /// Snapshot with key bytes only when the hash family is public.
  std::vector<std::uint8_t> reveal() const override;
  const BitArray& bits() const override { return bits_; }

  std::vector<std::uint64_t> indices(Element x) const;

  double fill_ratio() const noexcept {
    return static_cast<double>(bits_.popcount()) / static_cast<double>(params_.m);
  }
  bool is_saturated() const noexcept { return bits_.all_set(); }

  FilterKind kind() const noexcept {
    return hash_.mode() == HashMode::public_hash ? FilterKind::standard : FilterKind::prf_backed;
  }
  const FilterParams& params() const noexcept { return params_; }
  const Universe& universe() const noexcept { return universe_; }
  const HashFamily& hash() const noexcept { return hash_; }

 private:
  friend BloomFilter restore_bloom_filter(std::span<const std::uint8_t>, const Universe&);

  FilterParams params_;
  Universe universe_;
  HashFamily hash_;
  BitArray bits_;
  mutable std::vector<std::uint64_t> scratch_;
};

struct NyOptions {
  bool insertable = false;
  /// Stores the permutation key inside the revealed representation.
  bool leak_key = false;
};

/// Naor-Yogev filter: an inner Bloom filter that stores and queries the
/// keyed permutation of each element instead of the element itself.
class NyFilter final : public Filter {
 public:
  using InnerFactory = std::function<BloomFilter(const ElementSet& permuted)>;

  static NyFilter build(const ElementSet& s, const Universe& universe, const Key& prp_key,
                        const InnerFactory& inner, NyOptions options = {});
  /// Inner filter is a standard public-hash filter with `params`.
  static NyFilter build(const ElementSet& s, const FilterParams& params,
                        const Universe& universe, const Key& prp_key, NyOptions options = {});

  bool query(Element x) const override;
  /// Throws UnsupportedOperation unless built insertable.
  void insert(Element x) override;
  std::vector<std::uint8_t> reveal() const override;
  const BitArray& bits() const override { return inner_.bits(); }

  const BloomFilter& inner() const noexcept { return inner_; }
  const FeistelPrp& prp() const noexcept { return prp_; }
  const Universe& universe() const noexcept { return universe_; }

 private:
  NyFilter(BloomFilter inner, FeistelPrp prp, Universe universe, NyOptions options)
      : inner_(std::move(inner)), prp_(prp), universe_(universe), options_(options) {}

  BloomFilter inner_;
  FeistelPrp prp_;
  Universe universe_;
  NyOptions options_;
};

// Snapshot layout (all integers little-endian), see docs/FORMAT.md:
//   0  magic "RBFM"       4 bytes
//   4  version            u16
//   6  m                  u64
//  14  k                  u32
//  18  kind               u8   (FilterKind)
//  19  hash mode          u8   (HashMode)
//  20  key length         u32
//  24  key bytes          key length
//  ..  bit array          ceil(m / 8) bytes, bit i in byte i/8 at bit i%8
inline constexpr std::uint16_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotKeyOffset = 24;

struct Snapshot {
  std::uint16_t version = kSnapshotVersion;
  std::uint64_t m = 0;
  std::uint32_t k = 0;
  FilterKind kind = FilterKind::standard;
  HashMode mode = HashMode::public_hash;
  std::vector<std::uint8_t> key;
  BitArray bits;
};

std::vector<std::uint8_t> encode_snapshot(const Snapshot& snap);
/// Throws ParameterError on malformed input.
Snapshot decode_snapshot(std::span<const std::uint8_t> bytes);

/// Full snapshot of a filter including its key, for persistence.
std::vector<std::uint8_t> serialize(const BloomFilter& filter);
/// Restores a public or keyed filter. True-random filters cannot be restored.
BloomFilter restore_bloom_filter(std::span<const std::uint8_t> bytes, const Universe& universe);

/// Human-readable JSON dump of a filter.
std::string debug_json(const BloomFilter& filter);

}  // namespace rbf
