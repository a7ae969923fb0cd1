#include <sstream>

#include "json.hpp"
#include "rbf/bloom_filter.hpp"

namespace rbf {

namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'B', 'F', 'M'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const Snapshot& snap) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint16_t>(out, snap.version);
  put_le<std::uint64_t>(out, snap.m);
  put_le<std::uint32_t>(out, snap.k);
  out.push_back(static_cast<std::uint8_t>(snap.kind));
  out.push_back(static_cast<std::uint8_t>(snap.mode));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(snap.key.size()));
  out.insert(out.end(), snap.key.begin(), snap.key.end());
  const auto bits = snap.bits.to_bytes();
  out.insert(out.end(), bits.begin(), bits.end());
  return out;
}

Snapshot decode_snapshot(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSnapshotKeyOffset || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw ParameterError("not a filter snapshot");
  }
  Snapshot snap;
  snap.version = get_le<std::uint16_t>(bytes, 4);
  if (snap.version != kSnapshotVersion) {
    throw ParameterError("unsupported snapshot version " + std::to_string(snap.version));
  }
  snap.m = get_le<std::uint64_t>(bytes, 6);
  snap.k = get_le<std::uint32_t>(bytes, 14);
  const auto kind = bytes[18];
  const auto mode = bytes[19];
  if (kind > 2 || mode > 2) throw ParameterError("bad kind or hash mode in snapshot");
  snap.kind = static_cast<FilterKind>(kind);
  snap.mode = static_cast<HashMode>(mode);
  const auto key_len = get_le<std::uint32_t>(bytes, 20);
  const std::size_t bits_offset = kSnapshotKeyOffset + key_len;
  if (snap.m == 0 || bytes.size() != bits_offset + (snap.m + 7) / 8) {
    throw ParameterError("snapshot length does not match header");
  }
  snap.key.assign(bytes.begin() + kSnapshotKeyOffset, bytes.begin() + static_cast<std::ptrdiff_t>(bits_offset));
  snap.bits = BitArray::from_bytes(snap.m, bytes.subspan(bits_offset));
  return snap;
}

std::vector<std::uint8_t> serialize(const BloomFilter& filter) {
  const auto key = filter.hash().key();
  Snapshot snap{kSnapshotVersion, filter.params().m, filter.params().k, filter.kind(),
                filter.hash().mode(), {key.begin(), key.end()}, filter.bits()};
  return encode_snapshot(snap);
}

BloomFilter restore_bloom_filter(std::span<const std::uint8_t> bytes, const Universe& universe) {
  Snapshot snap = decode_snapshot(bytes);
  if (snap.kind == FilterKind::ny_prp_wrapped) throw ParameterError("snapshot is not a plain Bloom filter");
  if (snap.mode == HashMode::true_random) {
    throw UnsupportedOperation("true-random filters cannot be restored from a snapshot");
  }
  Key key{};
  if (snap.key.size() != key.size()) throw ParameterError("snapshot key has wrong length");
  std::copy(snap.key.begin(), snap.key.end(), key.begin());
  FilterParams params{snap.m, snap.k, 0, std::nullopt};
  HashFamily hash = snap.mode == HashMode::public_hash ? HashFamily::public_hash() : HashFamily::keyed(key);
  if (snap.mode == HashMode::public_hash && key != kPublicKey) {
    throw ParameterError("public snapshot carries a non-public key");
  }
  BloomFilter filter(params, universe, std::move(hash));
  filter.bits_ = std::move(snap.bits);
  return filter;
}

std::string debug_json(const BloomFilter& filter) {
  std::string bits;
  bits.reserve(filter.params().m);
  for (std::uint64_t i = 0; i < filter.params().m; ++i) bits.push_back(filter.bits().test(i) ? '1' : '0');
  std::ostringstream key_hex;
  for (auto b : filter.hash().key()) {
    static constexpr char kHex[] = "0123456789abcdef";
    key_hex << kHex[b >> 4] << kHex[b & 15];
  }
  nlohmann::ordered_json j;
  j["kind"] = to_string(filter.kind());
  j["hash_mode"] = to_string(filter.hash().mode());
  j["m"] = filter.params().m;
  j["k"] = filter.params().k;
  j["n"] = filter.params().n;
  j["u"] = filter.universe().size;
  j["popcount"] = filter.bits().popcount();
  j["fill_ratio"] = filter.fill_ratio();
  j["saturated"] = filter.is_saturated();
  j["key_hex"] = key_hex.str();
  j["bits"] = bits;
  return j.dump(2);
}

}  // namespace rbf
