#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "rbf/filic.hpp"

using namespace rbf;

namespace {

FilicConfig filic_config(std::uint64_t u, std::uint64_t n, std::uint64_t m, std::uint32_t k) {
  FilicConfig cfg;
  cfg.universe = Universe(u);
  cfg.n = n;
  cfg.m = m;
  cfg.k = k;
  return cfg;
}

// Outputs the parity of the revealed popcount.
class ParityAdversary final : public FilicAdversary {
 public:
  ElementSet choose_set(const FilicConfig& cfg, Rng& rng) override { return sample_distinct(rng, cfg.universe, cfg.n); }
  Output run(Oracles& oracles, Rng&) override {
    const auto bytes = oracles.reveal();
    if (!bytes) return std::nullopt;
    return static_cast<std::int64_t>(decode_snapshot(*bytes).bits.popcount() % 2);
  }
};

// Queries elements 0, 1, 2, ... `count` times, then outputs 1.
class QueryingAdversary final : public FilicAdversary {
 public:
  explicit QueryingAdversary(std::uint64_t count) : count_(count) {}
  ElementSet choose_set(const FilicConfig& cfg, Rng& rng) override {
    u_ = cfg.universe.size;
    return sample_distinct(rng, cfg.universe, cfg.n);
  }
  Output run(Oracles& oracles, Rng&) override {
    for (std::uint64_t i = 0; i < count_; ++i) {
      if (oracles.query(i % u_) == Reply::refused) break;
    }
    return 1;
  }

 private:
  std::uint64_t count_;
  std::uint64_t u_ = 1;
};

struct Op {
  enum Kind { query, insert, reveal } kind;
  Element x;
};

// Independent bookkeeping of the quoted list semantics, checked op by op.
struct Model {
  std::vector<Element> inserted;
  std::vector<Element> fp;
  bool listed(Element x) const {
    return std::find(inserted.begin(), inserted.end(), x) != inserted.end() ||
           std::find(fp.begin(), fp.end(), x) != fp.end();
  }
};

void check_step(SimulatorState& st, Model& model, const Op& op) {
  const BitArray before = st.bits();
  switch (op.kind) {
    case Op::query: {
      const bool was_listed = model.listed(op.x);
      const bool all_zero = before.popcount() == 0;
      const bool all_one = before.all_set();
      const bool r = st.sim_query(op.x);
      if (was_listed) {
        ASSERT_TRUE(r);
      } else {
        if (all_zero) ASSERT_FALSE(r);
        if (all_one) ASSERT_TRUE(r);
        if (r) model.fp.push_back(op.x);
      }
      ASSERT_EQ(st.bits(), before);  // queries never write
      break;
    }
    case Op::insert: {
      const bool present = std::find(model.inserted.begin(), model.inserted.end(), op.x) != model.inserted.end();
      st.sim_insert(op.x);
      if (present) {
        ASSERT_EQ(st.bits(), before);
      } else {
        model.inserted.push_back(op.x);
        BitArray expected = before;
        for (std::uint64_t b : st.f(op.x)) expected.set(b);
        ASSERT_EQ(st.bits(), expected);
      }
      break;
    }
    case Op::reveal: {
      const auto snap = decode_snapshot(st.sim_reveal());
      ASSERT_EQ(snap.bits, st.bits());
      break;
    }
  }
  ASSERT_EQ(st.inserted(), model.inserted);
  ASSERT_EQ(st.fp_list(), model.fp);
  ASSERT_EQ(st.ctr(), model.inserted.size());
}

void explore(const SimulatorState& st, const Model& model, int depth, const std::vector<Op>& ops,
             std::uint64_t& visited) {
  ++visited;
  if (depth == 0) return;
  for (const Op& op : ops) {
    SimulatorState next = st;
    Model next_model = model;
    check_step(next, next_model, op);
    if (::testing::Test::HasFatalFailure()) return;
    explore(next, next_model, depth - 1, ops, visited);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

}  // namespace

TEST(Simulator, ListShortCircuitAndIdempotentInsert) {
  SimulatorState empty(16, 2, 1);
  for (Element x = 0; x < 50; ++x) EXPECT_FALSE(empty.sim_query(x));
  EXPECT_TRUE(empty.fp_list().empty());

  SimulatorState st(4, 1, 2);
  st.sim_build({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  EXPECT_EQ(st.ctr(), 10u);
  Element fp = 100;
  while (!st.sim_query(fp)) ++fp;
  for (int i = 0; i < 20; ++i) EXPECT_TRUE(st.sim_query(fp));
  EXPECT_EQ(std::count(st.fp_list().begin(), st.fp_list().end(), fp), 1);

  st.sim_insert(3);
  st.sim_insert(200);
  st.sim_insert(200);
  EXPECT_EQ(st.ctr(), 11u);
  // A prior false positive that is then inserted sits on both lists.
  st.sim_insert(fp);
  EXPECT_TRUE(st.is_inserted(fp));
  EXPECT_TRUE(st.is_false_positive(fp));
}

TEST(Simulator, ExhaustiveOracleSequences) {
  std::vector<Op> ops;
  for (Element x = 0; x < 4; ++x) {
    ops.push_back({Op::query, x});
    ops.push_back({Op::insert, x});
  }
  ops.push_back({Op::reveal, 0});
  for (const ElementSet& s : {ElementSet{}, ElementSet{1}, ElementSet{0, 3}}) {
    for (std::uint64_t seed : {1, 2}) {
      SimulatorState st(4, 2, seed);
      st.sim_build(s);
      Model model;
      model.inserted.assign(s.begin(), s.end());
      std::uint64_t visited = 0;
      explore(st, model, 6, ops, visited);
      ASSERT_FALSE(HasFatalFailure());
      EXPECT_EQ(visited, 597871u);  // sum of 9^L for L = 0..6
    }
  }
}

TEST(Simulator, ResponsesIndependentOfLabels) {
  Rng rng(3);
  const std::uint64_t u = 32;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Element> perm(u);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const ElementSet s = sample_distinct(rng, Universe(u), 5);
    std::vector<Op> ops;
    for (int i = 0; i < 40; ++i) {
      ops.push_back({bernoulli(rng, 0.3) ? Op::insert : Op::query, uniform_below(rng, u)});
    }
    ElementSet ps;
    for (Element x : s) ps.insert(perm[x]);
    const std::uint64_t seed = rng();
    SimulatorState a(16, 2, seed);
    SimulatorState b(16, 2, seed);
    a.sim_build(s);
    b.sim_build(ps);
    for (const Op& op : ops) {
      if (op.kind == Op::insert) {
        a.sim_insert(op.x);
        b.sim_insert(perm[op.x]);
      } else {
        ASSERT_EQ(a.sim_query(op.x), b.sim_query(perm[op.x]));
      }
    }
    EXPECT_EQ(a.bits(), b.bits());
    EXPECT_EQ(a.ctr(), b.ctr());
  }
}

TEST(Simulator, FreshQueryRateMatchesDensity) {
  // Brute-force oracle: (popcount / m)^k averaged over states.
  RunningStats hits, density;
  for (std::uint64_t trial = 0; trial < 400; ++trial) {
    SimulatorState st(64, 3, trial);
    Rng rng(trial);
    st.sim_build(sample_distinct(rng, Universe(1u << 20), 15));
    density.add(std::pow(static_cast<double>(st.bits().popcount()) / 64.0, 3.0));
    for (Element x = 1u << 20; x < (1u << 20) + 250; ++x) hits.add(st.sim_query(x));
  }
  EXPECT_NEAR(hits.mean(), density.mean(), 3.0 * hits.standard_error() + 3.0 * density.standard_error());
}

TEST(Experiments, BudgetViolationFeedsRefusalToken) {
  const auto cfg = filic_config(1000, 10, 64, 3);
  const auto factory = standard_filter_factory({64, 3, 10, {}}, cfg.universe);
  struct Recorder final : Distinguisher {
    mutable std::optional<Output> seen;
    bool decide(const Output& out, Rng&) const override {
      seen = out;
      return out.has_value();
    }
  } recorder;
  QueryingAdversary within(5), over(6);
  const OracleBudget budget{0, 5, 0};
  EXPECT_TRUE(run_real(within, factory, recorder, cfg, budget, 1));
  EXPECT_EQ(*recorder.seen, Output{1});
  EXPECT_FALSE(run_real(over, factory, recorder, cfg, budget, 1));
  EXPECT_FALSE(recorder.seen->has_value());
  QueryingAdversary over_ideal(6);
  EXPECT_FALSE(run_ideal(over_ideal, recorder, cfg, budget, 1));
  // Reveal with q_v = 0 is refused too.
  ParityAdversary parity;
  EXPECT_FALSE(run_ideal(parity, recorder, cfg, budget, 1));
}

TEST(Experiments, NullAdversaryHasNoAdvantage) {
  const auto cfg = filic_config(1u << 16, 20, 128, 3);
  const auto rep = estimate_advantage([] { return null_adversary(1); }, standard_filter_factory({128, 3, 20, {}}, cfg.universe),
                                      identity_distinguisher(), cfg, {0, 0, 0}, 1000, 4);
  EXPECT_EQ(rep.advantage, 0.0);
  EXPECT_TRUE(rep.ci.contains(0.0));
  EXPECT_THROW(estimate_advantage([] { return null_adversary(); }, standard_filter_factory({128, 3, 20, {}}, cfg.universe),
                                  identity_distinguisher(), cfg, {}, 999, 4),
               ParameterError);
  const auto j = nlohmann::json::parse(rep.to_json());
  for (const char* key : {"q_u", "q_t", "q_v", "advantage", "ci_lo", "ci_hi"}) EXPECT_TRUE(j.contains(key));
}

TEST(Experiments, ReplayIsDeterministic) {
  const auto cfg = filic_config(1u << 12, 30, 64, 3);
  const auto factory = standard_filter_factory({64, 3, 30, {}}, cfg.universe);
  const auto d = identity_distinguisher();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ParityAdversary a, b, c, e;
    EXPECT_EQ(run_real(a, factory, *d, cfg, {0, 0, 1}, seed), run_real(b, factory, *d, cfg, {0, 0, 1}, seed));
    EXPECT_EQ(run_ideal(c, *d, cfg, {0, 0, 1}, seed), run_ideal(e, *d, cfg, {0, 0, 1}, seed));
  }
}

TEST(Experiments, AdvantageStaysInUnitInterval) {
  const auto cfg = filic_config(1u << 12, 30, 64, 3);
  const auto rep = estimate_advantage([] { return std::make_unique<ParityAdversary>(); },
                                      standard_filter_factory({64, 3, 30, {}}, cfg.universe),
                                      identity_distinguisher(), cfg, {0, 0, 1}, 1000, 5);
  EXPECT_GE(rep.advantage, 0.0);
  EXPECT_LE(rep.advantage, 1.0);
  EXPECT_GE(rep.ci.lo, 0.0);
  EXPECT_LE(rep.ci.hi, 1.0);
  EXPECT_LE(rep.ci.lo, rep.advantage);
  EXPECT_GE(rep.ci.hi, rep.advantage);
}

TEST(Experiments, PublicHashCollisionsDistinguish) {
  const auto cfg = filic_config(1u << 16, 10, 64, 3);
  const auto rep = estimate_advantage([] { return colliding_query_adversary(); },
                                      standard_filter_factory({64, 3, 10, {}}, cfg.universe),
                                      identity_distinguisher(), cfg, {0, 1, 0}, 1000, 6);
  EXPECT_EQ(rep.p_real, 1.0);
  EXPECT_GT(rep.ci.lo, 0.0) << rep.to_json();
}

TEST(KeyLeak, KeyAtDocumentedOffset) {
  Rng rng(7);
  const Key key = random_key(rng);
  auto f = key_leaking_ny_filter({1, 2, 3}, {64, 4, 3, {}}, Universe(1000), key);
  const auto bytes = f.reveal();
  ASSERT_GE(bytes.size(), kSnapshotKeyOffset + key.size());
  EXPECT_TRUE(std::equal(key.begin(), key.end(), bytes.begin() + kSnapshotKeyOffset));
  EXPECT_EQ(decode_snapshot(bytes).kind, FilterKind::ny_prp_wrapped);
  f.insert(500);
  EXPECT_TRUE(f.query(500));
}

TEST(KeyLeak, KeyReadingAdversaryDistinguishes) {
  const auto cfg = filic_config(1u << 16, 10, 64, 4);
  const FilterParams fp{64, 4, 10, {}};
  const auto rep = estimate_advantage([] { return key_reading_adversary(); }, key_leaking_ny_factory(fp, cfg.universe),
                                      identity_distinguisher(), cfg, {0, 1, 1}, 1000, 8);
  EXPECT_GE(rep.advantage, 0.9) << rep.to_json();
  EXPECT_GE(rep.p_real, 0.99);
  // Ideal: the public key bytes in the simulator's reveal lead nowhere, so
  // the hit rate is the density false-positive rate.
  RunningStats density;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    SimulatorState st(64, 4, t);
    Rng rng(t);
    st.sim_build(sample_distinct(rng, cfg.universe, 10));
    density.add(std::pow(static_cast<double>(st.bits().popcount()) / 64.0, 4.0));
  }
  EXPECT_TRUE(wilson_interval(rep.ideal_ones, rep.trials).contains(density.mean())) << rep.to_json();
}

TEST(Reduction, WrappedSaturationAdversaryAlwaysHitsTinyFilter) {
  const auto cfg = filic_config(1000, 20, 4, 3);
  const auto [adv, d] = ab_to_filic_adversary(saturation_adversary, 5);
  const auto rep = estimate_advantage(adv, true_random_filter_factory({4, 3, 20, {}}, cfg.universe), d, cfg,
                                      {0, 5, 0}, 1000, 9);
  EXPECT_GE(rep.p_real, 0.999);
}

TEST(Reduction, RealWorldMatchesAbGameAndIdealMatchesDensity) {
  const FilterParams fp{1024, 7, 100, {}};
  const auto cfg = filic_config(1u << 20, 100, 1024, 7);
  const auto factory = prf_filter_factory(fp, cfg.universe);
  const auto [adv, d] = ab_to_filic_adversary(random_adversary, 11);
  const auto rep = estimate_advantage(adv, factory, d, cfg, {0, 11, 0}, 20000, 10);

  GameConfig game;
  game.universe = cfg.universe;
  game.n = 100;
  game.t = 10;
  const auto ab = estimate_ab(factory, random_adversary, game, 20000, 11);
  const Interval real_ci = wilson_interval(rep.real_ones, rep.trials);
  EXPECT_LE(real_ci.lo, ab.ci.hi);
  EXPECT_LE(ab.ci.lo, real_ci.hi);

  const double fpr = std::pow(1.0 - std::exp(-700.0 / 1024.0), 7.0);
  EXPECT_TRUE(wilson_interval(rep.ideal_ones, rep.trials).contains(fpr)) << rep.to_json();
  EXPECT_TRUE(rep.ci.contains(0.0)) << rep.to_json();
}
