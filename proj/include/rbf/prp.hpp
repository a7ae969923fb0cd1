#pragma once

#include <cstdint>

#include "rbf/hashing.hpp"

namespace rbf {

/// Keyed pseudorandom permutation of [0, domain).
///
/// A 4-round balanced Feistel network over the smallest even bit width that
/// covers the domain, with keyed_prf as round function. Values that land
/// outside the domain are re-encrypted (cycle walking), which keeps the map
/// a bijection on [0, domain).
class FeistelPrp {
 public:
  FeistelPrp(const Key& key, std::uint64_t domain);

  std::uint64_t domain() const noexcept { return domain_; }
  const Key& key() const noexcept { return key_; }

  std::uint64_t permute(std::uint64_t x) const;
  std::uint64_t inverse(std::uint64_t y) const;

 private:
  static constexpr int kRounds = 4;

  std::uint64_t encrypt_block(std::uint64_t x) const noexcept;
  std::uint64_t decrypt_block(std::uint64_t y) const noexcept;

  Key key_;
  std::uint64_t domain_;
  unsigned half_bits_;
  std::uint64_t half_mask_;
};

}  // namespace rbf
