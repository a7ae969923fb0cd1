#include "rbf/hashing.hpp"

#include <sodium.h>

namespace rbf {

static_assert(crypto_shorthash_siphash24_KEYBYTES == std::tuple_size_v<Key>);

std::uint64_t keyed_prf(const Key& key, std::uint64_t a, std::uint64_t b) noexcept {
  std::uint8_t msg[16];
  for (int i = 0; i < 8; ++i) {
    msg[i] = static_cast<std::uint8_t>(a >> (8 * i));
    msg[8 + i] = static_cast<std::uint8_t>(b >> (8 * i));
  }
  std::uint8_t out[crypto_shorthash_siphash24_BYTES];
  crypto_shorthash_siphash24(out, msg, sizeof msg, key.data());
  std::uint64_t h = 0;
  for (int i = 0; i < 8; ++i) h |= static_cast<std::uint64_t>(out[i]) << (8 * i);
  return h;
}

Key random_key(Rng& rng) {
  Key key;
  for (std::size_t i = 0; i < key.size(); i += 8) {
    const std::uint64_t w = rng();
    for (std::size_t j = 0; j < 8; ++j) key[i + j] = static_cast<std::uint8_t>(w >> (8 * j));
  }
  return key;
}

const char* to_string(HashMode mode) noexcept {
  switch (mode) {
    case HashMode::public_hash: return "public";
    case HashMode::keyed_prf: return "keyed-prf";
    case HashMode::true_random: return "true-random";
  }
  return "unknown";
}

void HashFamily::derive(Element x, std::uint64_t m, std::uint32_t k,
                        std::vector<std::uint64_t>& out) const {
  out.resize(k);
  if (mode_ != HashMode::true_random) {
    for (std::uint32_t i = 0; i < k; ++i) out[i] = keyed_prf(key_, i, x) % m;
    return;
  }
  if (memo_.empty()) {
    memo_m_ = m;
    memo_k_ = k;
  } else if (memo_m_ != m || memo_k_ != k) {
    throw ParameterError("true-random hash family reused with different (m, k)");
  }
  auto [it, fresh] = memo_.try_emplace(x);
  if (fresh) {
    it->second.resize(k);
    for (auto& idx : it->second) idx = uniform_below(rng_, m);
  }
  out = it->second;
}

}  // namespace rbf
