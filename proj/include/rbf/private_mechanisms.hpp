#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "rbf/bloom_filter.hpp"
#include "rbf/common.hpp"
#include "rbf/stats.hpp"

namespace rbf {

/// Randomized-response flavour used to perturb a set before encoding it.
///   mangat: keep every member, add each non-member with probability 1 - p.
///   warner: keep each member with probability p, add each non-member with
///           probability 1 - p.
enum class RrMode : std::uint8_t { mangat, warner };

const char* to_string(RrMode mode) noexcept;
RrMode parse_rr_mode(const std::string& name);

struct PrivacyParams {
  RrMode mode = RrMode::mangat;
  double p = 0.5;  // truthful-answer probability

  /// mangat: p in (0, 1], where p = 1 is the noiseless limit.
  /// warner: p in (1/2, 1).
  void validate() const;
};

/// (epsilon, delta) budget; asymmetric budgets also carry epsilon_prime,
/// the bound for the addition direction (S vs S + {x}).
struct PrivacyBudget {
  double epsilon = 0.0;
  double epsilon_prime = 0.0;
  double delta = 0.0;
  bool symmetric = true;
};

struct PerturbedSet {
  std::uint64_t original_size = 0;
  ElementSet perturbed;
  RrMode mode = RrMode::mangat;
  double p = 0.5;
};

/// Perturbation walks the whole universe, so larger universes are rejected.
inline constexpr std::uint64_t kEnumerationCap = std::uint64_t{1} << 20;

/// |A u B| - |A n B|.
std::uint64_t jaccard_distance(const ElementSet& a, const ElementSet& b);

PerturbedSet mangat_perturb(const ElementSet& s, const Universe& universe, double p, std::uint64_t seed);
PerturbedSet warner_perturb(const ElementSet& s, const Universe& universe, double p, std::uint64_t seed);
PerturbedSet perturb(const ElementSet& s, const Universe& universe, const PrivacyParams& params,
                     std::uint64_t seed);

/// mangat: (ln(1/(1-p)), ln(1-p), 0), asymmetric.  warner: (ln(p/(1-p)), 0).
PrivacyBudget privacy_budget(const PrivacyParams& params);

/// Expected |S'| for a set of size s in a universe of size u.
/// mangat: s + (1-p)(u-s).  warner: p s + (1-p)(u-s), from the construction
/// (the shortcut p u does not match it).
double expected_cardinality(RrMode mode, double s, double u, double p);

/// (1 - e^{-k n_eff / m})^k.
double expected_fpr(const FilterParams& params, double n_eff);

/// Probability a member is missing from S': 0 for mangat, 1 - p for warner.
double expected_fnr(RrMode mode, double p);

struct PrivateFilter {
  PerturbedSet set;
  BloomFilter filter;
};

/// Encodes the perturbed set with an unmodified filter. Queries are answered
/// by the plain filter.
PrivateFilter build_private_filter(const ElementSet& s, const Universe& universe,
                                   const FilterParams& fparams, const PrivacyParams& privacy,
                                   HashFamily hash, std::uint64_t seed);
/// Same, with a keyed hash family derived from `seed`.
PrivateFilter build_private_filter(const ElementSet& s, const Universe& universe,
                                   const FilterParams& fparams, const PrivacyParams& privacy,
                                   std::uint64_t seed);

struct ErrorRates {
  double fpr = 0.0;
  double fnr = 0.0;
  std::uint64_t members = 0;
  std::uint64_t negatives = 0;  // elements outside both S and S'
  std::uint64_t injected = 0;   // elements of S' - S, excluded from the FPR
};

/// Exhaustive error rates of a private filter, classified against the
/// original set. Elements injected by the perturbation are not counted as
/// false positives.
ErrorRates measure_error_rates(const PrivateFilter& pf, const ElementSet& original,
                               const Universe& universe);

// ---------------------------------------------------------------------------
// Empirical auditing.
//
// A full-output DP audit needs the distribution over all subsets of U, which
// is exponential. The audit instead estimates the membership marginal
// Pr[x in output] for an input set and a neighbouring set, and compares the
// ratio of the two against e^epsilon. Passing is necessary, not sufficient,
// for the claimed budget.
// ---------------------------------------------------------------------------

/// Runs a randomized set map on `input` with `seed` and reports whether x is
/// in its output.
using MarginalMechanism = std::function<bool(const ElementSet& input, Element x, std::uint64_t seed)>;

MarginalMechanism marginal_mechanism(const PrivacyParams& params, const Universe& universe);

enum class Verdict : std::uint8_t { pass, fail, inconclusive };
const char* to_string(Verdict v) noexcept;

struct AuditReport {
  RrMode mode = RrMode::mangat;
  double p = 0.0;
  double epsilon_claimed = 0.0;
  double bound = 1.0;  // e^epsilon_claimed
  std::uint64_t trials = 0;
  double freq_input = 0.0;
  double freq_neighbor = 0.0;
  double ratio_point = 0.0;
  Interval ratio_ci;
  Verdict verdict = Verdict::inconclusive;

  /// {"mode","p","epsilon_claimed","ratio_point","ratio_ci":[lo,hi],"verdict",...}
  std::string to_json() const;
};

inline constexpr std::uint64_t kMinAuditTrials = 10000;

/// Compares Pr[x in M(s)] with Pr[x in M(neighbor)] using 99% Wilson
/// intervals on both frequencies. The ratio interval is the conservative
/// quotient of the two. Fails only when its lower end exceeds e^epsilon;
/// a zero neighbour count is inconclusive.
AuditReport dp_audit(const MarginalMechanism& mechanism, const PrivacyParams& claimed,
                     const ElementSet& s, const ElementSet& neighbor, Element x,
                     std::uint64_t trials, std::uint64_t seed);

/// Audits the bare mechanism with neighbor = s - {x} if x in s, else s + {x}.
AuditReport dp_audit(const PrivacyParams& params, const Universe& universe, const ElementSet& s,
                     Element x, std::uint64_t trials, std::uint64_t seed);

}  // namespace rbf
