#include "rbf/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace rbf {

void FilterParams::validate() const {
  if (m < 1) throw ParameterError("m must be >= 1");
  if (k < 1) throw ParameterError("k must be >= 1");
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) {
    throw ParameterError("epsilon must lie in (0, 1)");
  }
}

std::uint32_t optimal_k(std::uint64_t m, std::uint64_t n) {
  if (n == 0) return 1;
  const double k = std::round(static_cast<double>(m) / static_cast<double>(n) * std::numbers::ln2);
  return static_cast<std::uint32_t>(std::max(1.0, k));
}

FilterParams FilterParams::for_target(std::uint64_t n, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  FilterParams p;
  p.n = n;
  p.epsilon = epsilon;
  const double bits = -static_cast<double>(std::max<std::uint64_t>(n, 1)) * std::log(epsilon) /
                      (std::numbers::ln2 * std::numbers::ln2);
  p.m = static_cast<std::uint64_t>(std::max(1.0, std::ceil(bits)));
  p.k = optimal_k(p.m, n);
  return p;
}

ElementSet sample_distinct(Rng& rng, const Universe& universe, std::uint64_t count,
                           const ElementSet& exclude) {
  const auto excluded = static_cast<std::uint64_t>(
      std::count_if(exclude.begin(), exclude.end(), [&](Element x) { return universe.contains(x); }));
  const std::uint64_t available = universe.size - excluded;
  if (count > available) {
    throw ParameterError("cannot sample " + std::to_string(count) + " distinct elements from " +
                         std::to_string(available) + " available");
  }
  ElementSet out;
  if (count * 2 <= available) {
    while (out.size() < count) {
      const Element x = uniform_below(rng, universe.size);
      if (!exclude.contains(x)) out.insert(x);
    }
    return out;
  }
  // Dense case: enumerate the complement and take a partial shuffle.
  std::vector<Element> pool;
  pool.reserve(available);
  for (Element x = 0; x < universe.size; ++x) {
    if (!exclude.contains(x)) pool.push_back(x);
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto j = i + uniform_below(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
    out.insert(pool[i]);
  }
  return out;
}

}  // namespace rbf
