#include "rbf/filic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "json.hpp"

namespace rbf {

SimulatorState::SimulatorState(std::uint64_t m, std::uint32_t k, std::uint64_t seed)
    : m_(m),
      k_(k),
      bits_(m),
      f_(HashFamily::true_random(derive_seed(seed, tag_of("sim-f"), 0))),
      query_rng_(derive_seed(seed, tag_of("sim-query"), 0)) {
  if (m == 0 || k == 0) throw ParameterError("simulator needs m >= 1 and k >= 1");
}

void SimulatorState::sim_build(const ElementSet& s) {
  for (Element x : s) sim_insert(x);
}

bool SimulatorState::sim_query(Element x) {
  if (inserted_set_.contains(x) || fp_set_.contains(x)) return true;
  bool all = true;
  for (std::uint32_t i = 0; i < k_; ++i) {
    // Draw all k indices even after a miss so the stream advances uniformly.
    all = bits_.test(uniform_below(query_rng_, m_)) && all;
  }
  if (all) {
    fp_list_.push_back(x);
    fp_set_.insert(x);
  }
  return all;
}

void SimulatorState::sim_insert(Element x) {
  if (!inserted_set_.insert(x).second) return;
  for (std::uint64_t idx : f_.derive(x, m_, k_)) bits_.set(idx);
  inserted_.push_back(x);
  ++ctr_;
}

std::vector<std::uint8_t> SimulatorState::sim_reveal() const {
  Snapshot snap;
  snap.m = m_;
  snap.k = k_;
  snap.kind = FilterKind::standard;
  snap.mode = HashMode::public_hash;
  snap.key.assign(kPublicKey.begin(), kPublicKey.end());
  snap.bits = bits_;
  return encode_snapshot(snap);
}

void FilicConfig::validate() const {
  if (n > universe.size) throw ParameterError("n exceeds the universe size");
  if (m == 0 || k == 0) throw ParameterError("m and k must be >= 1");
}

namespace {

// Budget and domain enforcement in front of either world.
template <typename Backend>
class BudgetedOracles final : public Oracles {
 public:
  BudgetedOracles(Backend backend, const OracleBudget& budget, const Universe& universe)
      : backend_(std::move(backend)), budget_(budget), universe_(universe) {}

  Reply query(Element x) override {
    if (used_t_ >= budget_.q_t || !universe_.contains(x)) return refuse();
    ++used_t_;
    return backend_.query(x) ? Reply::one : Reply::zero;
  }

  bool insert(Element x) override {
    if (used_u_ >= budget_.q_u || !universe_.contains(x)) {
      refuse();
      return false;
    }
    ++used_u_;
    backend_.insert(x);
    return true;
  }

  std::optional<std::vector<std::uint8_t>> reveal() override {
    if (used_v_ >= budget_.q_v) {
      refuse();
      return std::nullopt;
    }
    ++used_v_;
    return backend_.reveal();
  }

  bool violated() const noexcept { return violated_; }

 private:
  Reply refuse() {
    violated_ = true;
    return Reply::refused;
  }

  Backend backend_;
  OracleBudget budget_;
  Universe universe_;
  std::uint64_t used_t_ = 0;
  std::uint64_t used_u_ = 0;
  std::uint64_t used_v_ = 0;
  bool violated_ = false;
};

struct RealBackend {
  Filter* filter;
  bool query(Element x) { return filter->query(x); }
  void insert(Element x) { filter->insert(x); }
  std::vector<std::uint8_t> reveal() { return filter->reveal(); }
};

struct IdealBackend {
  SimulatorState* state;
  bool query(Element x) { return state->sim_query(x); }
  void insert(Element x) { state->sim_insert(x); }
  std::vector<std::uint8_t> reveal() { return state->sim_reveal(); }
};

template <typename Backend>
bool finish(FilicAdversary& adversary, const Distinguisher& distinguisher, const FilicConfig& cfg,
            const OracleBudget& budget, Backend backend, Rng& adv_rng, std::uint64_t seed) {
  BudgetedOracles<Backend> oracles(backend, budget, cfg.universe);
  Output out = adversary.run(oracles, adv_rng);
  if (oracles.violated()) out = std::nullopt;
  Rng d_rng(derive_seed(seed, tag_of("filic-distinguisher"), 0));
  return distinguisher.decide(out, d_rng);
}

ElementSet checked_set(FilicAdversary& adversary, const FilicConfig& cfg, Rng& rng) {
  ElementSet s = adversary.choose_set(cfg, rng);
  cfg.universe.check(s);
  if (s.size() != cfg.n) throw ParameterError("adversary set size differs from n");
  return s;
}

class IdentityDistinguisher final : public Distinguisher {
 public:
  bool decide(const Output& out, Rng&) const override { return out.has_value() && *out == 1; }
};

}  // namespace

std::shared_ptr<const Distinguisher> identity_distinguisher() {
  return std::make_shared<IdentityDistinguisher>();
}

bool run_real(FilicAdversary& adversary, const FilterFactory& factory, const Distinguisher& distinguisher,
              const FilicConfig& cfg, const OracleBudget& budget, std::uint64_t seed) {
  cfg.validate();
  Rng adv_rng(derive_seed(seed, tag_of("filic-adversary"), 0));
  const ElementSet s = checked_set(adversary, cfg, adv_rng);
  auto filter = factory(s, derive_seed(seed, tag_of("filic-filter"), 0));
  return finish(adversary, distinguisher, cfg, budget, RealBackend{filter.get()}, adv_rng, seed);
}

bool run_ideal(FilicAdversary& adversary, const Distinguisher& distinguisher, const FilicConfig& cfg,
               const OracleBudget& budget, std::uint64_t seed) {
  cfg.validate();
  Rng adv_rng(derive_seed(seed, tag_of("filic-adversary"), 0));
  const ElementSet s = checked_set(adversary, cfg, adv_rng);
  SimulatorState state(cfg.m, cfg.k, derive_seed(seed, tag_of("filic-simulator"), 0));
  state.sim_build(s);
  return finish(adversary, distinguisher, cfg, budget, IdealBackend{&state}, adv_rng, seed);
}

std::string AdvantageReport::to_json() const {
  nlohmann::ordered_json j;
  j["q_u"] = budget.q_u;
  j["q_t"] = budget.q_t;
  j["q_v"] = budget.q_v;
  j["trials"] = trials;
  j["p_real"] = p_real;
  j["p_ideal"] = p_ideal;
  j["advantage"] = advantage;
  j["ci_lo"] = ci.lo;
  j["ci_hi"] = ci.hi;
  return j.dump();
}

AdvantageReport estimate_advantage(const FilicAdversaryFactory& adversary, const FilterFactory& factory,
                                   std::shared_ptr<const Distinguisher> distinguisher, const FilicConfig& cfg,
                                   const OracleBudget& budget, std::uint64_t trials, std::uint64_t seed) {
  if (trials < kMinAdvantageTrials) {
    throw ParameterError("advantage estimation needs at least " + std::to_string(kMinAdvantageTrials) +
                         " trials");
  }
  cfg.validate();
  const auto outcomes = parallel_map(trials, [&](std::uint64_t i) {
    auto real_adv = adversary();
    auto ideal_adv = adversary();
    const bool r = run_real(*real_adv, factory, *distinguisher, cfg, budget,
                            derive_seed(seed, tag_of("filic-real"), i));
    const bool d = run_ideal(*ideal_adv, *distinguisher, cfg, budget, derive_seed(seed, tag_of("filic-ideal"), i));
    return std::pair<bool, bool>{r, d};
  });
  AdvantageReport rep;
  rep.budget = budget;
  rep.trials = trials;
  for (const auto& [r, d] : outcomes) {
    rep.real_ones += r;
    rep.ideal_ones += d;
  }
  const double n = static_cast<double>(trials);
  rep.p_real = static_cast<double>(rep.real_ones) / n;
  rep.p_ideal = static_cast<double>(rep.ideal_ones) / n;
  const double diff = rep.p_real - rep.p_ideal;
  rep.advantage = std::abs(diff);

  // Newcombe's hybrid score interval for p_real - p_ideal, then |.|.
  const Interval wr = wilson_interval(rep.real_ones, trials);
  const Interval wi = wilson_interval(rep.ideal_ones, trials);
  const double lo = diff - std::hypot(rep.p_real - wr.lo, wi.hi - rep.p_ideal);
  const double hi = diff + std::hypot(wr.hi - rep.p_real, rep.p_ideal - wi.lo);
  if (lo <= 0.0 && hi >= 0.0) {
    rep.ci = {0.0, std::min(1.0, std::max(-lo, hi))};
  } else {
    rep.ci = {std::min(std::abs(lo), std::abs(hi)), std::min(1.0, std::max(std::abs(lo), std::abs(hi)))};
  }
  return rep;
}

namespace {

class WrappedAbAdversary final : public FilicAdversary {
 public:
  WrappedAbAdversary(std::unique_ptr<Adversary> inner, std::uint64_t q_t) : inner_(std::move(inner)), q_t_(q_t) {}

  ElementSet choose_set(const FilicConfig& cfg, Rng& rng) override {
    game_.universe = cfg.universe;
    game_.n = cfg.n;
    game_.t = q_t_ == 0 ? 0 : q_t_ - 1;
    s_ = inner_->choose_set(game_, rng);
    return s_;
  }

  Output run(Oracles& oracles, Rng& rng) override {
    if (q_t_ == 0) return 0;
    History history;
    ElementSet asked;
    for (std::uint64_t i = 0; i < game_.t; ++i) {
      const auto q = inner_->next_query(history, rng);
      if (!q) break;
      if (s_.contains(*q) || !asked.insert(*q).second) return 0;  // AB rule violation
      const Reply r = oracles.query(*q);
      if (r == Reply::refused) return std::nullopt;
      history.push_back({*q, r == Reply::one});
    }
    const Bet bet = inner_->finalize(history, rng);
    if (s_.contains(bet.x) || asked.contains(bet.x) || !game_.universe.contains(bet.x)) return 0;
    const Reply r = oracles.query(bet.x);
    if (r == Reply::refused) return std::nullopt;
    return r == Reply::one ? 1 : 0;
  }

 private:
  std::unique_ptr<Adversary> inner_;
  std::uint64_t q_t_;
  GameConfig game_;
  ElementSet s_;
};

}  // namespace

std::pair<FilicAdversaryFactory, std::shared_ptr<const Distinguisher>> ab_to_filic_adversary(
    AdversaryFactory ab_adversary, std::uint64_t q_t) {
  FilicAdversaryFactory factory = [ab_adversary = std::move(ab_adversary), q_t]() -> std::unique_ptr<FilicAdversary> {
    return std::make_unique<WrappedAbAdversary>(ab_adversary(), q_t);
  };
  return {std::move(factory), identity_distinguisher()};
}

NyFilter key_leaking_ny_filter(const ElementSet& s, const FilterParams& params, const Universe& universe,
                               const Key& key) {
  return NyFilter::build(s, params, universe, key, NyOptions{.insertable = true, .leak_key = true});
}

FilterFactory key_leaking_ny_factory(const FilterParams& params, const Universe& universe) {
  params.validate();
  return [params, universe](const ElementSet& s, std::uint64_t seed) -> std::unique_ptr<Filter> {
    Rng rng(seed);
    return std::make_unique<NyFilter>(key_leaking_ny_filter(s, params, universe, random_key(rng)));
  };
}

namespace {

// Searches for a non-member whose mapped public-hash indices are all set.
template <typename MapFn>
std::optional<Element> find_predicted_positive(const BitArray& bits, std::uint64_t m, std::uint32_t k,
                                               const Universe& universe, const ElementSet& s, MapFn map,
                                               std::uint64_t limit, Rng& rng) {
  const HashFamily pub = HashFamily::public_hash();
  std::vector<std::uint64_t> idx(k);
  for (std::uint64_t i = 0; i < limit; ++i) {
    const Element x = uniform_below(rng, universe.size);
    if (s.contains(x)) continue;
    pub.derive(map(x), m, k, idx);
    if (std::all_of(idx.begin(), idx.end(), [&](std::uint64_t b) { return bits.test(b); })) return x;
  }
  return std::nullopt;
}

class RandomSetAdversary : public FilicAdversary {
 public:
  ElementSet choose_set(const FilicConfig& cfg, Rng& rng) override {
    cfg_ = cfg;
    s_ = sample_distinct(rng, cfg.universe, cfg.n);
    return s_;
  }

 protected:
  FilicConfig cfg_;
  ElementSet s_;
};

class KeyReadingAdversary final : public RandomSetAdversary {
 public:
  explicit KeyReadingAdversary(std::uint64_t limit) : limit_(limit) {}

  Output run(Oracles& oracles, Rng& rng) override {
    const auto bytes = oracles.reveal();
    if (!bytes) return std::nullopt;
    Snapshot snap;
    try {
      snap = decode_snapshot(*bytes);
    } catch (const ParameterError&) {
      return 0;
    }
    if (snap.key.size() != sizeof(Key)) return 0;
    Key key{};
    std::memcpy(key.data(), snap.key.data(), key.size());
    const FeistelPrp prp(key, cfg_.universe.size);
    const auto x = find_predicted_positive(
        snap.bits, snap.m, snap.k, cfg_.universe, s_, [&](Element e) { return prp.permute(e); }, limit_, rng);
    if (!x) return 0;
    const Reply r = oracles.query(*x);
    if (r == Reply::refused) return std::nullopt;
    return r == Reply::one ? 1 : 0;
  }

 private:
  std::uint64_t limit_;
};

class CollidingQueryAdversary final : public RandomSetAdversary {
 public:
  explicit CollidingQueryAdversary(std::uint64_t limit) : limit_(limit) {}

  Output run(Oracles& oracles, Rng& rng) override {
    // The public indices of S are computable offline.
    BitArray bits(cfg_.m);
    const HashFamily pub = HashFamily::public_hash();
    for (Element x : s_) {
      for (std::uint64_t b : pub.derive(x, cfg_.m, cfg_.k)) bits.set(b);
    }
    const auto x = find_predicted_positive(
        bits, cfg_.m, cfg_.k, cfg_.universe, s_, [](Element e) { return e; }, limit_, rng);
    if (!x) return 0;
    const Reply r = oracles.query(*x);
    if (r == Reply::refused) return std::nullopt;
    return r == Reply::one ? 1 : 0;
  }

 private:
  std::uint64_t limit_;
};

class NullAdversary final : public RandomSetAdversary {
 public:
  explicit NullAdversary(std::int64_t constant) : constant_(constant) {}
  Output run(Oracles&, Rng&) override { return constant_; }

 private:
  std::int64_t constant_;
};

}  // namespace

std::unique_ptr<FilicAdversary> key_reading_adversary(std::uint64_t search_limit) {
  return std::make_unique<KeyReadingAdversary>(search_limit);
}

std::unique_ptr<FilicAdversary> colliding_query_adversary(std::uint64_t search_limit) {
  return std::make_unique<CollidingQueryAdversary>(search_limit);
}

std::unique_ptr<FilicAdversary> null_adversary(std::int64_t constant) {
  return std::make_unique<NullAdversary>(constant);
}

}  // namespace rbf
