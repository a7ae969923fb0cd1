#include "rbf/bloom_filter.hpp"

#include <algorithm>

namespace rbf {

const char* to_string(FilterKind kind) noexcept {
  switch (kind) {
    case FilterKind::standard: return "standard";
    case FilterKind::prf_backed: return "prf-backed";
    case FilterKind::ny_prp_wrapped: return "ny-prp-wrapped";
  }
  return "unknown";
}

BloomFilter::BloomFilter(FilterParams params, Universe universe, HashFamily hash)
    : params_(params), universe_(universe), hash_(std::move(hash)), bits_(params.m) {
  params_.validate();
}

BloomFilter BloomFilter::build(const ElementSet& s, const FilterParams& params,
                               const Universe& universe, HashFamily hash) {
  universe.check(s);
  BloomFilter filter(params, universe, std::move(hash));
  for (Element x : s) filter.insert(x);
  return filter;
}

std::vector<std::uint64_t> BloomFilter::indices(Element x) const {
  universe_.check(x);
  return hash_.derive(x, params_.m, params_.k);
}

bool BloomFilter::query(Element x) const {
  universe_.check(x);
  hash_.derive(x, params_.m, params_.k, scratch_);
  return std::all_of(scratch_.begin(), scratch_.end(), [&](std::uint64_t i) { return bits_.test(i); });
}

void BloomFilter::insert(Element x) {
  universe_.check(x);
  hash_.derive(x, params_.m, params_.k, scratch_);
  for (auto i : scratch_) bits_.set(i);
}

std::vector<std::uint8_t> BloomFilter::reveal() const {
  Snapshot snap{kSnapshotVersion, params_.m, params_.k, kind(), hash_.mode(), {}, bits_};
  if (hash_.mode() == HashMode::public_hash) {
    snap.key.assign(hash_.key().begin(), hash_.key().end());
  }
  return encode_snapshot(snap);
}

NyFilter NyFilter::build(const ElementSet& s, const Universe& universe, const Key& prp_key,
                         const InnerFactory& inner, NyOptions options) {
  universe.check(s);
  FeistelPrp prp(prp_key, universe.size);
  ElementSet permuted;
  for (Element x : s) permuted.insert(prp.permute(x));
  return NyFilter(inner(permuted), prp, universe, options);
}

NyFilter NyFilter::build(const ElementSet& s, const FilterParams& params, const Universe& universe,
                         const Key& prp_key, NyOptions options) {
  return build(
      s, universe, prp_key,
      [&](const ElementSet& permuted) {
        return BloomFilter::build(permuted, params, universe, HashFamily::public_hash());
      },
      options);
}

bool NyFilter::query(Element x) const {
  universe_.check(x);
  return inner_.query(prp_.permute(x));
}

void NyFilter::insert(Element x) {
  if (!options_.insertable) throw UnsupportedOperation("NY filter built as static");
  universe_.check(x);
  inner_.insert(prp_.permute(x));
}

std::vector<std::uint8_t> NyFilter::reveal() const {
  Snapshot snap{kSnapshotVersion, inner_.params().m, inner_.params().k,
                FilterKind::ny_prp_wrapped, inner_.hash().mode(), {}, inner_.bits()};
  if (options_.leak_key) snap.key.assign(prp_.key().begin(), prp_.key().end());
  return encode_snapshot(snap);
}

}  // namespace rbf
