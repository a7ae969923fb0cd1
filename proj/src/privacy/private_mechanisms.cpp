#include "rbf/private_mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

#include "rbf/format.hpp"

namespace rbf {

const char* to_string(RrMode mode) noexcept { return mode == RrMode::mangat ? "mangat" : "warner"; }

RrMode parse_rr_mode(const std::string& name) {
  if (name == "mangat") return RrMode::mangat;
  if (name == "warner") return RrMode::warner;
  throw ParameterError("unknown randomized-response mode '" + name + "'");
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

void PrivacyParams::validate() const {
  if (mode == RrMode::mangat && !(p > 0.0 && p <= 1.0)) {
    throw ParameterError("mangat p must lie in (0, 1]");
  }
  if (mode == RrMode::warner && !(p > 0.5 && p < 1.0)) {
    throw ParameterError("warner p must lie in (1/2, 1)");
  }
}

std::uint64_t jaccard_distance(const ElementSet& a, const ElementSet& b) {
  std::uint64_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::uint64_t uni = a.size() + b.size() - common;
  return uni - common;
}

namespace {

void check_enumerable(const ElementSet& s, const Universe& universe) {
  if (universe.size > kEnumerationCap) {
    throw UnsupportedOperation("universe of size " + std::to_string(universe.size) +
                               " exceeds the perturbation enumeration cap");
  }
  universe.check(s);
}

}  // namespace

PerturbedSet mangat_perturb(const ElementSet& s, const Universe& universe, double p, std::uint64_t seed) {
  PrivacyParams{RrMode::mangat, p}.validate();
  check_enumerable(s, universe);
  Rng rng(seed);
  PerturbedSet out{s.size(), s, RrMode::mangat, p};
  auto hint = out.perturbed.begin();
  for (Element x = 0; x < universe.size; ++x) {
    if (s.contains(x)) continue;
    if (bernoulli(rng, 1.0 - p)) hint = std::next(out.perturbed.insert(hint, x));
  }
  return out;
}

PerturbedSet warner_perturb(const ElementSet& s, const Universe& universe, double p, std::uint64_t seed) {
  PrivacyParams{RrMode::warner, p}.validate();
  check_enumerable(s, universe);
  Rng rng(seed);
  PerturbedSet out{s.size(), {}, RrMode::warner, p};
  for (Element x = 0; x < universe.size; ++x) {
    const double keep = s.contains(x) ? p : 1.0 - p;
    if (bernoulli(rng, keep)) out.perturbed.insert(out.perturbed.end(), x);
  }
  return out;
}

PerturbedSet perturb(const ElementSet& s, const Universe& universe, const PrivacyParams& params,
                     std::uint64_t seed) {
  return params.mode == RrMode::mangat ? mangat_perturb(s, universe, params.p, seed)
                                       : warner_perturb(s, universe, params.p, seed);
}

PrivacyBudget privacy_budget(const PrivacyParams& params) {
  params.validate();
  const double p = params.p;
  if (params.mode == RrMode::mangat) {
    return {-std::log1p(-p), std::log1p(-p), 0.0, false};
  }
  return {std::log(p) - std::log1p(-p), 0.0, 0.0, true};
}

double expected_cardinality(RrMode mode, double s, double u, double p) {
  if (s < 0 || s > u) throw ParameterError("need 0 <= |S| <= |U|");
  if (mode == RrMode::mangat) return s + (1.0 - p) * (u - s);
  return p * s + (1.0 - p) * (u - s);
}

double expected_fpr(const FilterParams& params, double n_eff) {
  params.validate();
  const double k = params.k;
  return std::pow(1.0 - std::exp(-k * n_eff / static_cast<double>(params.m)), k);
}

double expected_fnr(RrMode mode, double p) { return mode == RrMode::mangat ? 0.0 : 1.0 - p; }

PrivateFilter build_private_filter(const ElementSet& s, const Universe& universe,
                                   const FilterParams& fparams, const PrivacyParams& privacy,
                                   HashFamily hash, std::uint64_t seed) {
  PerturbedSet set = perturb(s, universe, privacy, seed);
  BloomFilter filter = BloomFilter::build(set.perturbed, fparams, universe, std::move(hash));
  return {std::move(set), std::move(filter)};
}

PrivateFilter build_private_filter(const ElementSet& s, const Universe& universe,
                                   const FilterParams& fparams, const PrivacyParams& privacy,
                                   std::uint64_t seed) {
  Rng key_rng(derive_seed(seed, tag_of("private-filter-key"), 0));
  return build_private_filter(s, universe, fparams, privacy, HashFamily::keyed(key_rng), seed);
}

ErrorRates measure_error_rates(const PrivateFilter& pf, const ElementSet& original,
                               const Universe& universe) {
  check_enumerable(original, universe);
  ErrorRates r;
  std::uint64_t false_negatives = 0;
  std::uint64_t false_positives = 0;
  for (Element x = 0; x < universe.size; ++x) {
    const bool positive = pf.filter.query(x);
    if (original.contains(x)) {
      ++r.members;
      false_negatives += !positive;
    } else if (pf.set.perturbed.contains(x)) {
      ++r.injected;
    } else {
      ++r.negatives;
      false_positives += positive;
    }
  }
  r.fnr = r.members ? static_cast<double>(false_negatives) / static_cast<double>(r.members) : 0.0;
  r.fpr = r.negatives ? static_cast<double>(false_positives) / static_cast<double>(r.negatives) : 0.0;
  return r;
}

MarginalMechanism marginal_mechanism(const PrivacyParams& params, const Universe& universe) {
  params.validate();
  return [params, universe](const ElementSet& input, Element x, std::uint64_t seed) {
    return perturb(input, universe, params, seed).perturbed.contains(x);
  };
}

std::string AuditReport::to_json() const {
  std::ostringstream os;
  os << "{\"mode\":\"" << to_string(mode) << "\",\"p\":" << format_double(p)
     << ",\"epsilon_claimed\":" << format_double(epsilon_claimed)
     << ",\"bound\":" << format_double(bound) << ",\"trials\":" << trials
     << ",\"freq_input\":" << format_double(freq_input)
     << ",\"freq_neighbor\":" << format_double(freq_neighbor)
     << ",\"ratio_point\":" << format_double(ratio_point) << ",\"ratio_ci\":["
     << format_double(ratio_ci.lo) << "," << format_double(ratio_ci.hi) << "],\"verdict\":\""
     << to_string(verdict) << "\"}";
  return os.str();
}

AuditReport dp_audit(const MarginalMechanism& mechanism, const PrivacyParams& claimed,
                     const ElementSet& s, const ElementSet& neighbor, Element x,
                     std::uint64_t trials, std::uint64_t seed) {
  if (trials < kMinAuditTrials) {
    throw ParameterError("audit needs at least " + std::to_string(kMinAuditTrials) + " trials");
  }
  if (jaccard_distance(s, neighbor) > 1) throw ParameterError("audit sets must be neighbours");
  if (s != neighbor && s.contains(x) == neighbor.contains(x)) {
    throw ParameterError("audit element must distinguish the two sets");
  }

  const PrivacyBudget budget = privacy_budget(claimed);
  AuditReport report;
  report.mode = claimed.mode;
  report.p = claimed.p;
  report.trials = trials;
  // Adding x to the input is the epsilon_prime direction of an asymmetric budget.
  const bool addition = !s.contains(x) && neighbor.contains(x);
  report.epsilon_claimed = (!budget.symmetric && addition) ? budget.epsilon_prime : budget.epsilon;
  report.bound = std::exp(report.epsilon_claimed);

  const std::uint64_t tag = tag_of("dp-audit");
  const auto hits = parallel_map(trials, [&](std::uint64_t i) {
    const bool a = mechanism(s, x, derive_seed(seed, tag, 2 * i));
    const bool b = mechanism(neighbor, x, derive_seed(seed, tag, 2 * i + 1));
    return std::pair<bool, bool>{a, b};
  });
  std::uint64_t count_input = 0;
  std::uint64_t count_neighbor = 0;
  for (const auto& [a, b] : hits) {
    count_input += a;
    count_neighbor += b;
  }
  const double n = static_cast<double>(trials);
  report.freq_input = static_cast<double>(count_input) / n;
  report.freq_neighbor = static_cast<double>(count_neighbor) / n;
  if (count_neighbor == 0) {
    report.verdict = Verdict::inconclusive;
    return report;
  }
  const Interval ci_input = wilson_interval(count_input, trials);
  const Interval ci_neighbor = wilson_interval(count_neighbor, trials);
  report.ratio_point = report.freq_input / report.freq_neighbor;
  report.ratio_ci = {ci_input.lo / ci_neighbor.hi, ci_input.hi / ci_neighbor.lo};
  // Small tolerance so an exact-equality bound (ratio == e^eps) is not
  // failed by floating-point noise.
  report.verdict = report.ratio_ci.lo > report.bound * (1.0 + 1e-12) ? Verdict::fail : Verdict::pass;
  return report;
}

AuditReport dp_audit(const PrivacyParams& params, const Universe& universe, const ElementSet& s,
                     Element x, std::uint64_t trials, std::uint64_t seed) {
  universe.check(x);
  ElementSet neighbor = s;
  if (s.contains(x)) {
    neighbor.erase(x);
  } else {
    neighbor.insert(x);
  }
  return dp_audit(marginal_mechanism(params, universe), params, s, neighbor, x, trials, seed);
}

}  // namespace rbf
