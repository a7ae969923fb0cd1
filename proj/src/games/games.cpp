#include "rbf/games.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace rbf {

void GameConfig::validate() const {
  if (n > universe.size) throw ParameterError("n exceeds the universe size");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
}

FilterFactory standard_filter_factory(const FilterParams& params, const Universe& universe) {
  params.validate();
  return [params, universe](const ElementSet& s, std::uint64_t) -> std::unique_ptr<Filter> {
    return std::make_unique<BloomFilter>(BloomFilter::build(s, params, universe, HashFamily::public_hash()));
  };
}

FilterFactory prf_filter_factory(const FilterParams& params, const Universe& universe) {
  params.validate();
  return [params, universe](const ElementSet& s, std::uint64_t seed) -> std::unique_ptr<Filter> {
    Rng rng(seed);
    return std::make_unique<BloomFilter>(BloomFilter::build(s, params, universe, HashFamily::keyed(rng)));
  };
}

FilterFactory true_random_filter_factory(const FilterParams& params, const Universe& universe) {
  params.validate();
  return [params, universe](const ElementSet& s, std::uint64_t seed) -> std::unique_ptr<Filter> {
    return std::make_unique<BloomFilter>(BloomFilter::build(s, params, universe, HashFamily::true_random(seed)));
  };
}

FilterFactory ny_filter_factory(const FilterParams& params, const Universe& universe) {
  params.validate();
  return [params, universe](const ElementSet& s, std::uint64_t seed) -> std::unique_ptr<Filter> {
    Rng rng(seed);
    const Key key = random_key(rng);
    return std::make_unique<NyFilter>(NyFilter::build(s, params, universe, key));
  };
}

namespace {

struct GameRun {
  Transcript transcript;
  std::unique_ptr<Filter> filter;
  Rng adversary_rng;
};

void forfeit(Transcript& t, std::string reason) {
  t.forfeited = true;
  t.forfeit_reason = std::move(reason);
}

GameRun play(const FilterFactory& factory, Adversary& adversary, const GameConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  GameRun run{{}, nullptr, Rng(derive_seed(seed, tag_of("game-adversary"), 0))};
  Transcript& tr = run.transcript;

  tr.s = adversary.choose_set(cfg, run.adversary_rng);
  if (tr.s.size() != cfg.n) {
    forfeit(tr, "set size " + std::to_string(tr.s.size()) + " != n");
    return run;
  }
  if (!tr.s.empty() && !cfg.universe.contains(*tr.s.rbegin())) {
    forfeit(tr, "set element outside the universe");
    return run;
  }
  run.filter = factory(tr.s, derive_seed(seed, tag_of("game-filter"), 0));

  std::unordered_set<Element> asked;
  for (std::uint64_t i = 0; i < cfg.t; ++i) {
    const auto q = adversary.next_query(tr.history, run.adversary_rng);
    if (!q) break;
    if (!cfg.universe.contains(*q)) {
      forfeit(tr, "query outside the universe");
      return run;
    }
    if (tr.s.contains(*q)) {
      forfeit(tr, "query inside S");
      return run;
    }
    if (!asked.insert(*q).second) {
      forfeit(tr, "repeated query");
      return run;
    }
    tr.history.push_back({*q, run.filter->query(*q)});
  }
  return run;
}

// Applies the challenge rules to x*; forfeits the transcript on a violation.
bool valid_challenge(Transcript& tr, const GameConfig& cfg, Element x) {
  if (!cfg.universe.contains(x)) {
    forfeit(tr, "challenge outside the universe");
    return false;
  }
  if (tr.s.contains(x)) {
    forfeit(tr, "challenge inside S");
    return false;
  }
  for (const auto& rec : tr.history) {
    if (rec.x == x) {
      forfeit(tr, "challenge already queried");
      return false;
    }
  }
  return true;
}

double fill_of(const Filter& f) {
  const auto& bits = f.bits();
  return static_cast<double>(bits.popcount()) / static_cast<double>(bits.size());
}

}  // namespace

Transcript run_adaptive_game(const FilterFactory& factory, Adversary& adversary, const GameConfig& cfg,
                             std::uint64_t seed) {
  return play(factory, adversary, cfg, seed).transcript;
}

AbOutcome run_ab_test(const FilterFactory& factory, Adversary& adversary, const GameConfig& cfg,
                      std::uint64_t seed) {
  GameRun run = play(factory, adversary, cfg, seed);
  AbOutcome out;
  out.queries = run.transcript.history.size();
  if (run.transcript.forfeited) {
    out.forfeited = true;
    return out;
  }
  const Bet bet = adversary.finalize(run.transcript.history, run.adversary_rng);
  if (!valid_challenge(run.transcript, cfg, bet.x)) {
    out.forfeited = true;
    return out;
  }
  out.win = run.filter->query(bet.x);
  return out;
}

double bp_profit(bool bet, bool false_positive, double delta) {
  if (!bet) return 0.0;
  return false_positive ? 1.0 / delta : -1.0 / (1.0 - delta);
}

ProfitOutcome run_bp_test(const FilterFactory& factory, Adversary& adversary, const GameConfig& cfg,
                          std::uint64_t seed) {
  GameRun run = play(factory, adversary, cfg, seed);
  ProfitOutcome out;
  if (run.filter) {
    out.saturated = run.filter->bits().all_set();
    out.fill_ratio = fill_of(*run.filter);
  }
  if (run.transcript.forfeited) {
    out.forfeited = true;
    return out;
  }
  const Bet bet = adversary.finalize(run.transcript.history, run.adversary_rng);
  if (!bet.bet) return out;
  if (!valid_challenge(run.transcript, cfg, bet.x)) {
    out.forfeited = true;
    return out;
  }
  out.bet = true;
  out.false_positive = run.filter->query(bet.x);
  out.profit = bp_profit(true, out.false_positive, cfg.delta);
  return out;
}

namespace {

// Shared behaviour of the two canned adversaries: random S, then a fixed
// batch of distinct non-member probes, then a fresh challenge.
class ProbingAdversary : public Adversary {
 public:
  explicit ProbingAdversary(bool require_all_positive) : require_all_positive_(require_all_positive) {}

  ElementSet choose_set(const GameConfig& cfg, Rng& rng) override {
    universe_ = cfg.universe.size;
    s_ = sample_distinct(rng, cfg.universe, cfg.n);
    // Leave room for a fresh challenge whenever the complement allows it.
    const std::uint64_t free = cfg.universe.size - cfg.n;
    const std::uint64_t probes = std::min<std::uint64_t>(cfg.t, free == 0 ? 0 : free - 1);
    const ElementSet picked = sample_distinct(rng, cfg.universe, probes, s_);
    probes_.assign(picked.begin(), picked.end());
    std::shuffle(probes_.begin(), probes_.end(), rng);
    return s_;
  }

  std::optional<Element> next_query(const History& history, Rng&) override {
    if (history.size() >= probes_.size()) return std::nullopt;
    return probes_[history.size()];
  }

  Bet finalize(const History& history, Rng& rng) override {
    Bet bet;
    if (require_all_positive_) {
      for (const auto& rec : history) {
        if (!rec.answer) {
          bet.bet = false;
          return bet;
        }
      }
    }
    if (universe_ - s_.size() <= history.size()) {
      bet.x = 0;  // no fresh element exists; the harness will reject this
      return bet;
    }
    std::unordered_set<Element> used(probes_.begin(), probes_.end());
    do {
      bet.x = uniform_below(rng, universe_);
    } while (s_.contains(bet.x) || used.contains(bet.x));
    return bet;
  }

 private:
  bool require_all_positive_;
  std::uint64_t universe_ = 1;
  ElementSet s_;
  std::vector<Element> probes_;
};

}  // namespace

std::unique_ptr<Adversary> random_adversary() { return std::make_unique<ProbingAdversary>(false); }

std::unique_ptr<Adversary> saturation_adversary() { return std::make_unique<ProbingAdversary>(true); }

AbEstimate estimate_ab(const FilterFactory& factory, const AdversaryFactory& adversary,
                       const GameConfig& cfg, std::uint64_t trials, std::uint64_t seed) {
  cfg.validate();
  const auto outcomes = parallel_map(trials, [&](std::uint64_t i) {
    auto adv = adversary();
    return run_ab_test(factory, *adv, cfg, derive_seed(seed, tag_of("ab-trial"), i));
  });
  AbEstimate est;
  est.trials = trials;
  for (const auto& o : outcomes) {
    est.wins += o.win;
    est.forfeits += o.forfeited;
  }
  est.win_rate = trials == 0 ? 0.0 : static_cast<double>(est.wins) / static_cast<double>(trials);
  est.ci = wilson_interval(est.wins, trials);
  return est;
}

BpEstimate estimate_bp(const FilterFactory& factory, const AdversaryFactory& adversary,
                       const GameConfig& cfg, std::uint32_t k, std::uint64_t trials, std::uint64_t seed) {
  cfg.validate();
  const auto outcomes = parallel_map(trials, [&](std::uint64_t i) {
    auto adv = adversary();
    return run_bp_test(factory, *adv, cfg, derive_seed(seed, tag_of("bp-trial"), i));
  });
  BpEstimate est;
  est.trials = trials;
  RunningStats profit;
  RunningStats fp;
  for (const auto& o : outcomes) {
    profit.add(o.profit);
    est.bets += o.bet;
    est.false_positive_bets += o.bet && o.false_positive;
    est.forfeits += o.forfeited;
    est.saturated += o.saturated;
    if (!o.saturated) fp.add(std::pow(o.fill_ratio, static_cast<double>(k)));
  }
  est.mean_profit = profit.mean();
  est.standard_error = profit.standard_error();
  est.ci = {est.mean_profit - kZ99 * est.standard_error, est.mean_profit + kZ99 * est.standard_error};
  est.p_fp_unsaturated = fp.mean();
  return est;
}

}  // namespace rbf
