#include "rbf/prp.hpp"

#include <bit>

namespace rbf {

FeistelPrp::FeistelPrp(const Key& key, std::uint64_t domain) : key_(key), domain_(domain) {
  if (domain == 0) throw ParameterError("permutation domain must be non-empty");
  unsigned width = domain == 1 ? 1U : static_cast<unsigned>(std::bit_width(domain - 1));
  width = std::max(width, 2U);
  width += width % 2;
  half_bits_ = width / 2;
  half_mask_ = half_bits_ == 32 ? 0xffffffffULL : (std::uint64_t{1} << half_bits_) - 1;
}

std::uint64_t FeistelPrp::encrypt_block(std::uint64_t x) const noexcept {
  std::uint64_t left = (x >> half_bits_) & half_mask_;
  std::uint64_t right = x & half_mask_;
  for (int r = 0; r < kRounds; ++r) {
    const std::uint64_t next = left ^ (keyed_prf(key_, static_cast<std::uint64_t>(r), right) & half_mask_);
    left = right;
    right = next;
  }
  return (left << half_bits_) | right;
}

std::uint64_t FeistelPrp::decrypt_block(std::uint64_t y) const noexcept {
  std::uint64_t left = (y >> half_bits_) & half_mask_;
  std::uint64_t right = y & half_mask_;
  for (int r = kRounds - 1; r >= 0; --r) {
    const std::uint64_t prev = right ^ (keyed_prf(key_, static_cast<std::uint64_t>(r), left) & half_mask_);
    right = left;
    left = prev;
  }
  return (left << half_bits_) | right;
}

std::uint64_t FeistelPrp::permute(std::uint64_t x) const {
  if (x >= domain_) throw DomainError("permutation input outside domain");
  std::uint64_t y = encrypt_block(x);
  while (y >= domain_) y = encrypt_block(y);
  return y;
}

std::uint64_t FeistelPrp::inverse(std::uint64_t y) const {
  if (y >= domain_) throw DomainError("permutation input outside domain");
  std::uint64_t x = decrypt_block(y);
  while (x >= domain_) x = decrypt_block(x);
  return x;
}

}  // namespace rbf
