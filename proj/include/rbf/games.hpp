#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rbf/bloom_filter.hpp"
#include "rbf/stats.hpp"

namespace rbf {

struct GameConfig {
  std::uint32_t lambda = 128;  // informational only
  std::uint64_t t = 0;         // query budget
  std::uint64_t n = 0;         // set cardinality
  Universe universe{1};
  double delta = 0.5;          // epsilon of the AB test, payout parameter of the BP test

  void validate() const;
};

/// Builds a fresh filter for each trial; the seed carries the trial's key
/// material and internal coins.
using FilterFactory = std::function<std::unique_ptr<Filter>(const ElementSet& s, std::uint64_t seed)>;

FilterFactory standard_filter_factory(const FilterParams& params, const Universe& universe);
FilterFactory prf_filter_factory(const FilterParams& params, const Universe& universe);
FilterFactory true_random_filter_factory(const FilterParams& params, const Universe& universe);
/// Static (non-insertable) Naor-Yogev filter with a per-trial key.
FilterFactory ny_filter_factory(const FilterParams& params, const Universe& universe);

struct QueryRecord {
  Element x = 0;
  bool answer = false;
};
using History = std::vector<QueryRecord>;

struct Bet {
  bool bet = true;
  Element x = 0;
};

/// Two-stage adversary: picks the set, then queries adaptively and returns
/// a final (bet, x*) pair.
class Adversary {
 public:
  virtual ~Adversary() = default;

  virtual ElementSet choose_set(const GameConfig& cfg, Rng& rng) = 0;
  /// Next query, or nullopt to stop early. Called at most t times.
  virtual std::optional<Element> next_query(const History& history, Rng& rng) = 0;
  virtual Bet finalize(const History& history, Rng& rng) = 0;
};

using AdversaryFactory = std::function<std::unique_ptr<Adversary>()>;

struct Transcript {
  ElementSet s;
  History history;
  bool forfeited = false;
  std::string forfeit_reason;
};

/// Runs the set-selection, build and query phases. Rule violations (wrong
/// set size, out-of-universe elements, repeated queries or queries inside
/// S) end the game as a forfeit instead of aborting.
Transcript run_adaptive_game(const FilterFactory& factory, Adversary& adversary, const GameConfig& cfg,
                             std::uint64_t seed);

struct AbOutcome {
  bool win = false;
  bool forfeited = false;
  std::uint64_t queries = 0;
};

/// The bet bit is ignored: the adversary always bets. Wins iff x* is outside
/// S and the history and the filter accepts it.
AbOutcome run_ab_test(const FilterFactory& factory, Adversary& adversary, const GameConfig& cfg,
                      std::uint64_t seed);

struct ProfitOutcome {
  bool bet = false;
  bool false_positive = false;
  double profit = 0.0;
  bool forfeited = false;
  // Diagnostics of the filter the game ran against.
  bool saturated = false;
  double fill_ratio = 0.0;
};

/// 1/delta for a correct bet, -1/(1-delta) for a wrong one, 0 for a pass.
double bp_profit(bool bet, bool false_positive, double delta);

/// Forfeits score as a pass.
ProfitOutcome run_bp_test(const FilterFactory& factory, Adversary& adversary, const GameConfig& cfg,
                          std::uint64_t seed);

/// Random set, t distinct uniform non-member queries, then always bets on a
/// fresh uniform x*. The honest baseline.
std::unique_ptr<Adversary> random_adversary();

/// Random set, t distinct uniform queries outside S; bets on a fresh uniform
/// x* only if every probe came back positive, otherwise passes. x* is drawn
/// from U and redrawn on the rare collision with S or the probes.
std::unique_ptr<Adversary> saturation_adversary();

// Monte Carlo estimates over independent trials with derived seeds.

struct AbEstimate {
  std::uint64_t trials = 0;
  std::uint64_t wins = 0;
  std::uint64_t forfeits = 0;
  double win_rate = 0.0;
  Interval ci;  // 99% Wilson
};

AbEstimate estimate_ab(const FilterFactory& factory, const AdversaryFactory& adversary,
                       const GameConfig& cfg, std::uint64_t trials, std::uint64_t seed);

struct BpEstimate {
  std::uint64_t trials = 0;
  std::uint64_t bets = 0;
  std::uint64_t false_positive_bets = 0;
  std::uint64_t forfeits = 0;
  std::uint64_t saturated = 0;
  double mean_profit = 0.0;
  double standard_error = 0.0;
  Interval ci;  // mean +- z99 * SE
  /// Mean of fill^k over unsaturated filters, the false-positive
  /// probability of a fresh element when indices are uniform.
  double p_fp_unsaturated = 0.0;
};

BpEstimate estimate_bp(const FilterFactory& factory, const AdversaryFactory& adversary,
                       const GameConfig& cfg, std::uint32_t k, std::uint64_t trials, std::uint64_t seed);

// Saturation analysis for filters with uniform indices.

struct SaturationProbability {
  double exact = 0.0;
  double lower_bound = 0.0;  // max(0, 1 - m e^{-nk/m})
};

/// Probability that n*k uniform indices cover all m bits, by
/// inclusion-exclusion sum_j (-1)^j C(m, j) (1 - j/m)^{nk}. When the
/// alternating sum cannot be trusted to about 13 digits the same quantity
/// is computed from the occupancy distribution instead.
SaturationProbability saturation_probability(std::uint64_t m, std::uint64_t n, std::uint64_t k);

/// Expected profit of the saturation adversary:
/// (p_s + p_fp^t (1-p_s)) ((p_s + p_fp (1-p_s)) / delta - (1-p_fp)(1-p_s) / (1-delta)).
double expected_profit_formula(double p_s, double p_fp, std::uint64_t t, double delta);

/// The formula at p_fp = 0: p_s^2 / delta - p_s (1-p_s) / (1-delta).
double profit_lower_bound(double p_s, double delta);

struct OptimalKCheck {
  std::uint32_t k = 0;
  double p_s_lower_bound = 0.0;
  /// delta < max(0, 1 - m e^{-nk/m}): the attack provably has positive
  /// expected profit.
  bool condition_met = false;
  /// nk > m ln((1-delta)/m), the simplified inequality used in the
  /// original analysis. Kept for comparison; see README.
  bool simplified_chain_holds = false;
};

/// Evaluates the attack condition with k = optimal_k(m, n).
OptimalKCheck resilience_threshold_with_optimal_k(std::uint64_t m, std::uint64_t n, double delta);

}  // namespace rbf
