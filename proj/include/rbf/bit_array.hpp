#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace rbf {

/// Fixed-length bit array. Bits can be set but never cleared.
class BitArray {
 public:
  BitArray() = default;
  explicit BitArray(std::uint64_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::uint64_t size() const noexcept { return size_; }

  bool test(std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::uint64_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

  std::uint64_t popcount() const noexcept {
    std::uint64_t c = 0;
    for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  bool all_set() const noexcept { return popcount() == size_; }

  /// Packs bit i into byte i / 8 at bit position i % 8.
  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
    for (std::size_t b = 0; b < out.size(); ++b) {
      out[b] = static_cast<std::uint8_t>(words_[b / 8] >> (8 * (b % 8)));
    }
    return out;
  }

  static BitArray from_bytes(std::uint64_t size, std::span<const std::uint8_t> bytes) {
    BitArray a(size);
    for (std::size_t b = 0; b < bytes.size() && b * 8 < size; ++b) {
      a.words_[b / 8] |= static_cast<std::uint64_t>(bytes[b]) << (8 * (b % 8));
    }
    // Ignore padding bits past size.
    if (size % 64 != 0 && !a.words_.empty()) {
      a.words_.back() &= (std::uint64_t{1} << (size % 64)) - 1;
    }
    return a;
  }

  friend bool operator==(const BitArray&, const BitArray&) = default;

 private:
  std::uint64_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace rbf
