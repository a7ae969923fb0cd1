#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "rbf/games.hpp"

using namespace rbf;
namespace mp = boost::multiprecision;

namespace {

// Exact rational inclusion-exclusion: sum_j (-1)^j C(m, j) (m - j)^N / m^N.
double saturation_oracle(unsigned m, unsigned balls) {
  mp::cpp_int num = 0;
  mp::cpp_int binom = 1;
  for (unsigned j = 0; j <= m; ++j) {
    const mp::cpp_int term = binom * mp::pow(mp::cpp_int(m - j), balls);
    num += (j % 2 == 0) ? term : mp::cpp_int(-term);
    binom = binom * (m - j) / (j + 1);
  }
  const mp::cpp_rational r(num, mp::pow(mp::cpp_int(m), balls));
  return static_cast<double>(r);
}

GameConfig config(std::uint64_t u, std::uint64_t n, std::uint64_t t, double delta = 0.5) {
  GameConfig cfg;
  cfg.universe = Universe(u);
  cfg.n = n;
  cfg.t = t;
  cfg.delta = delta;
  return cfg;
}

// Scripted adversary for rule checks.
class Scripted : public Adversary {
 public:
  Scripted(ElementSet s, std::vector<Element> queries, Bet bet)
      : s_(std::move(s)), queries_(std::move(queries)), bet_(bet) {}

  ElementSet choose_set(const GameConfig&, Rng&) override { return s_; }
  std::optional<Element> next_query(const History& h, Rng&) override {
    if (h.size() >= queries_.size()) return std::nullopt;
    return queries_[h.size()];
  }
  Bet finalize(const History&, Rng&) override { return bet_; }

 private:
  ElementSet s_;
  std::vector<Element> queries_;
  Bet bet_;
};

const FilterParams kStd{1024, 7, 100, {}};

}  // namespace

TEST(Saturation, MatchesExactRationalOracle) {
  for (unsigned m : {1u, 2u, 3u, 4u, 8u, 16u, 32u, 64u}) {
    for (unsigned balls : {0u, 1u, 2u, 5u, 8u, 16u, 30u, 60u, 120u, 300u}) {
      const double oracle = saturation_oracle(m, balls);
      const auto got = saturation_probability(m, balls, 1);
      EXPECT_NEAR(got.exact, oracle, 1e-12 * std::max(oracle, 1e-3)) << "m=" << m << " N=" << balls;
    }
  }
}

TEST(Saturation, FallbackRegimeMatchesOracle) {
  // Heavy cancellation: the occupancy recurrence takes over.
  for (auto [m, balls] : {std::pair{512u, 1500u}, std::pair{128u, 300u}, std::pair{256u, 900u}}) {
    const double oracle = saturation_oracle(m, balls);
    const double got = saturation_probability(m, balls, 1).exact;
    EXPECT_NEAR(got, oracle, 1e-10 * oracle + 1e-300) << "m=" << m << " N=" << balls;
  }
}

TEST(Saturation, ExactDominatesLowerBound) {
  for (std::uint64_t m : {1, 2, 4, 8, 16, 32, 64, 128}) {
    for (std::uint64_t n = 0; n <= 200; n += 7) {
      for (std::uint64_t k : {1, 2, 3, 5}) {
        const auto p = saturation_probability(m, n, k);
        EXPECT_GE(p.exact, p.lower_bound - 1e-12) << m << " " << n << " " << k;
        EXPECT_LE(p.exact, 1.0);
        EXPECT_GE(p.lower_bound, 0.0);
      }
    }
  }
}

TEST(Saturation, ReferencePoint) {
  const auto p = saturation_probability(8, 20, 3);
  EXPECT_NEAR(p.lower_bound, 1.0 - 8.0 * std::exp(-7.5), 1e-15);
  EXPECT_NEAR(p.lower_bound, 0.99557, 1e-5);
  EXPECT_NEAR(p.exact, saturation_oracle(8, 60), 1e-14);
  EXPECT_EQ(saturation_probability(16, 1, 15).exact, 0.0);  // fewer indices than bits
  EXPECT_THROW(saturation_probability(0, 1, 1), ParameterError);
}

TEST(Profit, LowerBoundReference) {
  EXPECT_NEAR(profit_lower_bound(0.9956, 0.5), 1.974, 1e-3);
  for (double ps : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (double d : {0.1, 0.5, 0.9}) {
      EXPECT_NEAR(expected_profit_formula(ps, 0.0, 5, d), profit_lower_bound(ps, d), 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(profit_lower_bound(1.0, 0.5), 2.0);
  EXPECT_THROW(profit_lower_bound(0.5, 1.0), ParameterError);
}

TEST(Profit, FormulaEndpoints) {
  for (double d : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(expected_profit_formula(1.0, 0.4, 7, d), 1.0 / d, 1e-12);
    // Never saturated, no false positives: the adversary never bets.
    EXPECT_EQ(expected_profit_formula(0.0, 0.0, 3, d), 0.0);
    // Never saturated, every probe positive: a sure win on every trial.
    EXPECT_NEAR(expected_profit_formula(0.0, 1.0, 3, d), 1.0 / d, 1e-12);
  }
}

TEST(Profit, MonotoneInSaturationProbability) {
  for (double d : {0.2, 0.5, 0.8}) {
    double prev = -1e300;
    for (double ps = 0.5; ps <= 1.0; ps += 0.01) {
      const double v = expected_profit_formula(ps, 0.3, 8, d);
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
  }
}

TEST(Resilience, OptimalKCondition) {
  for (std::uint64_t n : {1, 2, 5, 100, 12345}) {
    EXPECT_TRUE(resilience_threshold_with_optimal_k(1, n, 0.5).condition_met) << n;
  }
  EXPECT_FALSE(resilience_threshold_with_optimal_k(1, 0, 0.5).condition_met);
  const auto big = resilience_threshold_with_optimal_k(1024, 100, 0.5);
  EXPECT_EQ(big.k, 7u);
  EXPECT_EQ(big.p_s_lower_bound, 0.0);
  EXPECT_FALSE(big.condition_met);
  // The simplified inequality has a negative right-hand side here, so it
  // holds regardless of the attack's viability.
  EXPECT_TRUE(big.simplified_chain_holds);
}

TEST(Game, TranscriptHasTDistinctNonMemberQueries) {
  const auto cfg = config(1u << 16, 100, 50);
  auto adv = random_adversary();
  const auto tr = run_adaptive_game(prf_filter_factory(kStd, cfg.universe), *adv, cfg, 1);
  EXPECT_FALSE(tr.forfeited);
  EXPECT_EQ(tr.s.size(), 100u);
  ASSERT_EQ(tr.history.size(), 50u);
  ElementSet seen;
  for (const auto& r : tr.history) {
    EXPECT_FALSE(tr.s.contains(r.x));
    EXPECT_TRUE(seen.insert(r.x).second);
  }
}

TEST(Game, DeterministicForSeed) {
  const auto cfg = config(1u << 12, 30, 40);
  const auto factory = true_random_filter_factory({64, 3, 30, {}}, cfg.universe);
  auto a = saturation_adversary();
  auto b = saturation_adversary();
  const auto ta = run_adaptive_game(factory, *a, cfg, 77);
  const auto tb = run_adaptive_game(factory, *b, cfg, 77);
  EXPECT_EQ(ta.s, tb.s);
  ASSERT_EQ(ta.history.size(), tb.history.size());
  for (std::size_t i = 0; i < ta.history.size(); ++i) {
    EXPECT_EQ(ta.history[i].x, tb.history[i].x);
    EXPECT_EQ(ta.history[i].answer, tb.history[i].answer);
  }
}

TEST(Game, RuleViolationsForfeit) {
  const auto cfg = config(100, 3, 5);
  const auto factory = standard_filter_factory({64, 2, 3, {}}, cfg.universe);
  struct Case {
    ElementSet s;
    std::vector<Element> q;
    Bet bet;
    const char* reason;
  };
  const std::vector<Case> cases = {
      {{1, 2}, {}, {true, 50}, "set size"},
      {{1, 2, 100}, {}, {true, 50}, "set element outside"},
      {{1, 2, 3}, {10, 10}, {true, 50}, "repeated query"},
      {{1, 2, 3}, {10, 2}, {true, 50}, "query inside S"},
      {{1, 2, 3}, {10, 200}, {true, 50}, "query outside"},
  };
  for (const auto& c : cases) {
    Scripted adv(c.s, c.q, c.bet);
    const auto tr = run_adaptive_game(factory, adv, cfg, 1);
    EXPECT_TRUE(tr.forfeited) << c.reason;
    EXPECT_NE(tr.forfeit_reason.find(c.reason), std::string::npos) << tr.forfeit_reason;
    Scripted again(c.s, c.q, c.bet);
    const auto bp = run_bp_test(factory, again, cfg, 1);
    EXPECT_TRUE(bp.forfeited);
    EXPECT_EQ(bp.profit, 0.0);
  }
  // Challenges inside S or the history forfeit too.
  for (Element x : {Element{2}, Element{10}, Element{1000}}) {
    Scripted adv({1, 2, 3}, {10, 11}, {true, x});
    const auto ab = run_ab_test(factory, adv, cfg, 1);
    EXPECT_TRUE(ab.forfeited);
    EXPECT_FALSE(ab.win);
  }
  // The query budget caps a long script without a forfeit.
  std::vector<Element> many;
  for (Element x = 10; x < 30; ++x) many.push_back(x);
  Scripted greedy({1, 2, 3}, many, {true, 50});
  const auto tr = run_adaptive_game(factory, greedy, cfg, 1);
  EXPECT_FALSE(tr.forfeited);
  EXPECT_EQ(tr.history.size(), 5u);
}

TEST(Game, PassScoresZero) {
  EXPECT_EQ(bp_profit(false, true, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(bp_profit(true, true, 0.25), 4.0);
  EXPECT_DOUBLE_EQ(bp_profit(true, false, 0.25), -1.0 / 0.75);
}

TEST(Game, HonestQueryHitRateMatchesFpr) {
  const auto cfg = config(1u << 20, 100, 100);
  const auto factory = standard_filter_factory(kStd, cfg.universe);
  const auto hits = parallel_map(1000, [&](std::uint64_t i) {
    auto adv = random_adversary();
    const auto tr = run_adaptive_game(factory, *adv, cfg, derive_seed(5, 0, i));
    std::uint64_t h = 0;
    for (const auto& r : tr.history) h += r.answer;
    return h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  const double rate = static_cast<double>(total) / 1e5;
  const double fpr = std::pow(1.0 - std::exp(-700.0 / 1024.0), 7.0);
  EXPECT_NEAR(rate, fpr, 0.002);
}

TEST(AbTest, NaiveAdversaryWinsAtFpr) {
  const auto cfg = config(1u << 20, 100, 10);
  const auto est = estimate_ab(standard_filter_factory(kStd, cfg.universe), random_adversary, cfg, 20000, 6);
  const double fpr = std::pow(1.0 - std::exp(-700.0 / 1024.0), 7.0);
  EXPECT_EQ(est.forfeits, 0u);
  EXPECT_TRUE(est.ci.contains(fpr)) << est.win_rate;
}

TEST(AbTest, AdversaryWinsAgainstSaturatedFilter) {
  const auto cfg = config(1000, 20, 4);
  const FilterParams tiny{4, 3, 20, {}};
  const auto est = estimate_ab(true_random_filter_factory(tiny, cfg.universe), random_adversary, cfg, 2000, 7);
  EXPECT_GE(est.win_rate, 0.999);
}

TEST(BpTest, AlwaysBetAtFprBreaksEven) {
  const double fpr = std::pow(1.0 - std::exp(-700.0 / 1024.0), 7.0);
  const auto cfg = config(1u << 20, 100, 0, fpr);
  const auto est = estimate_bp(prf_filter_factory(kStd, cfg.universe), random_adversary, cfg, 7, 50000, 8);
  EXPECT_EQ(est.bets, 50000u);
  EXPECT_NEAR(est.mean_profit, 0.0, 3.0 * est.standard_error + 0.02);
}

TEST(BpTest, SaturationAttackProfit) {
  const auto cfg = config(1u << 16, 20, 16, 0.5);
  const auto factory = true_random_filter_factory({8, 3, 20, {}}, cfg.universe);
  const auto est = estimate_bp(factory, saturation_adversary, cfg, 3, 10000, 9);
  const auto ps = saturation_probability(8, 20, 3);
  EXPECT_GE(est.mean_profit, profit_lower_bound(ps.exact, 0.5) - 3.0 * est.standard_error);
  EXPECT_GT(est.ci.lo, 0.0);
  const double predicted = expected_profit_formula(ps.exact, est.p_fp_unsaturated, 16, 0.5);
  EXPECT_NEAR(est.mean_profit, predicted, 3.0 * est.standard_error + 1e-3);
  const auto sat = wilson_interval(est.saturated, est.trials);
  EXPECT_TRUE(sat.contains(ps.exact)) << est.saturated;
  EXPECT_EQ(est.forfeits, 0u);
}

TEST(BpTest, ProfitTracksSaturationAcrossSizes) {
  // Fixed nk/m = 7.5: p_s falls as m grows, and so should the profit.
  const auto cfg_for = [](std::uint64_t n) { return config(1u << 16, n, 16, 0.5); };
  double prev_mean = 1e300, prev_se = 0.0, prev_ps = 2.0;
  for (std::uint64_t m : {8, 16, 32}) {
    const std::uint64_t n = m * 15 / 6;
    const auto cfg = cfg_for(n);
    const auto est = estimate_bp(true_random_filter_factory({m, 3, n, {}}, cfg.universe), saturation_adversary,
                                 cfg, 3, 10000, 10 + m);
    const double ps = saturation_probability(m, n, 3).exact;
    EXPECT_LT(ps, prev_ps);
    EXPECT_LE(est.mean_profit, prev_mean + 3.0 * std::hypot(est.standard_error, prev_se));
    prev_mean = est.mean_profit;
    prev_se = est.standard_error;
    prev_ps = ps;
  }
}

TEST(BpTest, NyFilterRunsInGames) {
  const auto cfg = config(1u << 16, 50, 20);
  const auto est = estimate_ab(ny_filter_factory({512, 5, 50, {}}, cfg.universe), random_adversary, cfg, 500, 11);
  EXPECT_EQ(est.forfeits, 0u);
  EXPECT_LT(est.win_rate, 0.05);
}
