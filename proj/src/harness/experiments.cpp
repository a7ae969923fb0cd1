#include "experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "rbf/filic.hpp"
#include "rbf/games.hpp"
#include "rbf/private_mechanisms.hpp"

namespace rbf::harness::detail {

std::uint64_t Point::u64(const std::string& name) const {
  const std::string& s = text(name);
  std::uint64_t v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::uint32_t Point::u32(const std::string& name) const {
  const std::uint64_t v = u64(name);
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ParameterError(name + " is too large");
  return static_cast<std::uint32_t>(v);
}

double Point::real(const std::string& name) const {
  const std::string& s = text(name);
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

namespace {

constexpr const char* kHashChoices[] = {"public", "keyed", "true-random"};

ParamSpec integer(std::string name, std::string def, std::string help) {
  return {std::move(name), ParamType::integer, std::move(def), {}, std::move(help)};
}
ParamSpec real(std::string name, std::string def, std::string help) {
  return {std::move(name), ParamType::real, std::move(def), {}, std::move(help)};
}
ParamSpec choice(std::string name, std::string def, std::vector<std::string> choices, std::string help) {
  return {std::move(name), ParamType::choice, std::move(def), std::move(choices), std::move(help)};
}
ParamSpec hash_choice(std::string def) {
  return choice("hash", std::move(def), {std::begin(kHashChoices), std::end(kHashChoices)}, "hash family");
}

FilterParams filter_params(const Point& p) {
  FilterParams fp;
  fp.m = p.u64("m");
  fp.k = p.u32("k");
  fp.n = p.u64("n");
  fp.validate();
  return fp;
}

HashFamily hash_for(const std::string& name, std::uint64_t seed) {
  if (name == "public") return HashFamily::public_hash();
  if (name == "keyed") {
    Rng rng(seed);
    return HashFamily::keyed(rng);
  }
  return HashFamily::true_random(seed);
}

FilterFactory factory_for(const std::string& name, const FilterParams& fp, const Universe& u) {
  if (name == "public" || name == "standard") return standard_filter_factory(fp, u);
  if (name == "keyed" || name == "prf") return prf_filter_factory(fp, u);
  if (name == "true-random") return true_random_filter_factory(fp, u);
  if (name == "ny") return ny_filter_factory(fp, u);
  if (name == "key-leaking-ny") return key_leaking_ny_factory(fp, u);
  throw ParameterError("unknown filter " + name);
}

AdversaryFactory game_adversary(const std::string& name) {
  if (name == "saturation") return saturation_adversary;
  return random_adversary;
}

double closed_form_fpr(const FilterParams& fp) {
  return std::pow(1.0 - std::exp(-static_cast<double>(fp.k) * static_cast<double>(fp.n) / static_cast<double>(fp.m)),
                  static_cast<double>(fp.k));
}

// fpr-estimate: `builds` independent filters share `trials` distinct
// non-member queries.
std::vector<Value> run_fpr(const Point& p, std::uint64_t trials, std::uint64_t seed) {
  const FilterParams fp = filter_params(p);
  const Universe u(p.u64("u"));
  if (fp.n > u.size) throw ParameterError("n exceeds u");
  const std::uint64_t builds = std::max<std::uint64_t>(1, std::min(p.u64("builds"), trials));
  const std::string hash = p.text("hash");
  struct Out {
    std::uint64_t hits = 0;
    double fill = 0.0;
  };
  const auto outs = parallel_map(builds, [&](std::uint64_t b) {
    Rng rng(derive_seed(seed, tag_of("fpr-build"), b));
    const ElementSet s = sample_distinct(rng, u, fp.n);
    const auto filter = BloomFilter::build(s, fp, u, hash_for(hash, rng()));
    const std::uint64_t queries = trials / builds + (b < trials % builds ? 1 : 0);
    Out out;
    for (Element x : sample_distinct(rng, u, queries, s)) out.hits += filter.query(x);
    out.fill = filter.fill_ratio();
    return out;
  });
  std::uint64_t hits = 0;
  RunningStats fill;
  for (const auto& o : outs) {
    hits += o.hits;
    fill.add(o.fill);
  }
  const Interval ci = wilson_interval(hits, trials);
  return {static_cast<std::int64_t>(hits),
          static_cast<double>(hits) / static_cast<double>(trials), ci.lo, ci.hi, closed_form_fpr(fp), fill.mean()};
}

std::vector<Value> run_privacy_audit(const Point& p, std::uint64_t trials, std::uint64_t seed) {
  const PrivacyParams params{parse_rr_mode(p.text("mode")), p.real("p")};
  params.validate();
  const Universe u(p.u64("u"));
  const std::uint64_t size = p.u64("s");
  if (size > u.size) throw ParameterError("s exceeds u");
  ElementSet s;
  for (Element x = 0; x < size; ++x) s.insert(x);
  Element x = 0;
  if (p.text("direction") == "remove") {
    if (size == 0) throw ParameterError("removal needs s >= 1");
  } else {
    if (size == u.size) throw ParameterError("addition needs s < u");
    x = size;
  }
  const PrivacyBudget budget = privacy_budget(params);
  const AuditReport rep = dp_audit(params, u, s, x, trials, seed);
  return {budget.epsilon, budget.epsilon_prime, rep.epsilon_claimed, rep.bound, rep.freq_input, rep.freq_neighbor,
          rep.ratio_point, rep.ratio_ci.lo, rep.ratio_ci.hi, std::string(to_string(rep.verdict))};
}

GameConfig game_config(const Point& p, const Universe& u) {
  GameConfig cfg;
  cfg.universe = u;
  cfg.n = p.u64("n");
  cfg.t = p.u64("t");
  cfg.validate();
  return cfg;
}

std::vector<Value> run_bp(const Point& p, std::uint64_t trials, std::uint64_t seed) {
  const FilterParams fp = filter_params(p);
  const Universe u(p.u64("u"));
  GameConfig cfg = game_config(p, u);
  cfg.delta = p.real("delta");
  cfg.validate();
  const auto est = estimate_bp(factory_for(p.text("hash"), fp, u), game_adversary(p.text("adversary")), cfg, fp.k,
                               trials, seed);
  const auto ps = saturation_probability(fp.m, fp.n, fp.k);
  const double n = static_cast<double>(trials);
  return {est.mean_profit,
          est.standard_error,
          est.ci.lo,
          est.ci.hi,
          static_cast<std::int64_t>(est.bets),
          static_cast<double>(est.false_positive_bets) / n,
          static_cast<double>(est.saturated) / n,
          est.p_fp_unsaturated,
          ps.exact,
          ps.lower_bound,
          profit_lower_bound(ps.exact, cfg.delta),
          expected_profit_formula(ps.exact, est.p_fp_unsaturated, cfg.t, cfg.delta),
          static_cast<std::int64_t>(est.forfeits)};
}

std::vector<Value> run_ab(const Point& p, std::uint64_t trials, std::uint64_t seed) {
  const FilterParams fp = filter_params(p);
  const Universe u(p.u64("u"));
  const GameConfig cfg = game_config(p, u);
  const auto est =
      estimate_ab(factory_for(p.text("hash"), fp, u), game_adversary(p.text("adversary")), cfg, trials, seed);
  return {est.win_rate, est.ci.lo, est.ci.hi, static_cast<std::int64_t>(est.wins),
          static_cast<std::int64_t>(est.forfeits), closed_form_fpr(fp)};
}

std::vector<Value> run_filic(const Point& p, std::uint64_t trials, std::uint64_t seed) {
  const FilterParams fp = filter_params(p);
  FilicConfig cfg;
  cfg.universe = Universe(p.u64("u"));
  cfg.n = fp.n;
  cfg.m = fp.m;
  cfg.k = fp.k;
  OracleBudget budget;
  budget.q_u = p.u64("q_u");
  budget.q_t = p.u64("q_t");
  budget.q_v = p.u64("q_v");
  const std::string adv = p.text("adversary");
  FilicAdversaryFactory factory;
  auto distinguisher = identity_distinguisher();
  if (adv == "key-reading") {
    factory = [] { return key_reading_adversary(); };
  } else if (adv == "colliding") {
    factory = [] { return colliding_query_adversary(); };
  } else if (adv == "null") {
    factory = [] { return null_adversary(); };
  } else {
    auto wrapped = ab_to_filic_adversary(game_adversary(adv == "ab-saturation" ? "saturation" : "random"), budget.q_t);
    factory = std::move(wrapped.first);
    distinguisher = std::move(wrapped.second);
  }
  const auto rep = estimate_advantage(factory, factory_for(p.text("filter"), fp, cfg.universe), distinguisher, cfg,
                                      budget, trials, seed);
  return {rep.p_real, rep.p_ideal, rep.advantage, rep.ci.lo, rep.ci.hi};
}

std::vector<Value> run_saturation(const Point& p, std::uint64_t trials, std::uint64_t seed) {
  const std::uint64_t m = p.u64("m");
  const std::uint64_t n = p.u64("n");
  const std::uint32_t k = p.u32("k");
  const FilterParams fp{m, k, n, {}};
  fp.validate();
  const double delta = p.real("delta");
  const auto ps = saturation_probability(m, n, k);
  const Universe u(std::max<std::uint64_t>(n, 1));
  ElementSet s;
  for (Element x = 0; x < n; ++x) s.insert(x);
  const auto sat = parallel_map(trials, [&](std::uint64_t i) {
    return BloomFilter::build(s, fp, u, HashFamily::true_random(derive_seed(seed, tag_of("saturation-build"), i)))
        .is_saturated();
  });
  const auto hits = static_cast<std::uint64_t>(std::count(sat.begin(), sat.end(), true));
  const Interval ci = wilson_interval(hits, trials);
  const auto optimal = resilience_threshold_with_optimal_k(m, n, delta);
  return {ps.exact,
          ps.lower_bound,
          static_cast<double>(hits) / static_cast<double>(trials),
          ci.lo,
          ci.hi,
          profit_lower_bound(ps.exact, delta),
          static_cast<std::int64_t>(optimal.k),
          static_cast<std::int64_t>(optimal.condition_met)};
}

std::vector<Value> run_error_analysis(const Point& p, std::uint64_t trials, std::uint64_t seed) {
  const FilterParams fp = filter_params(p);
  const Universe u(p.u64("u"));
  const std::uint64_t size = p.u64("s");
  if (size > u.size) throw ParameterError("s exceeds u");
  const std::string mode = p.text("mode");
  // "none" is the noiseless Mangat limit: the set passes through unchanged.
  const PrivacyParams params = mode == "none" ? PrivacyParams{RrMode::mangat, 1.0}
                                              : PrivacyParams{parse_rr_mode(mode), p.real("p")};
  params.validate();
  struct Out {
    ErrorRates rates;
    std::uint64_t perturbed = 0;
  };
  const auto outs = parallel_map(trials, [&](std::uint64_t i) {
    Rng rng(derive_seed(seed, tag_of("error-build"), i));
    const ElementSet s = sample_distinct(rng, u, size);
    const auto pf = build_private_filter(s, u, fp, params, rng());
    return Out{measure_error_rates(pf, s, u), pf.set.perturbed.size()};
  });
  RunningStats fpr, fnr, card;
  for (const auto& o : outs) {
    fpr.add(o.rates.fpr);
    if (o.rates.members > 0) fnr.add(o.rates.fnr);
    card.add(static_cast<double>(o.perturbed));
  }
  const double n_eff =
      expected_cardinality(params.mode, static_cast<double>(size), static_cast<double>(u.size), params.p);
  return {fpr.mean(), fpr.standard_error(), expected_fpr(fp, n_eff), fnr.mean(),
          fnr.standard_error(), expected_fnr(params.mode, params.p), card.mean(), n_eff};
}

std::vector<ExperimentDef> make_definitions() {
  const std::vector<std::string> games_metrics_bp = {
      "mean_profit", "standard_error", "ci_lo",     "ci_hi",        "bets",           "win_rate",   "saturated_rate",
      "p_fp",        "p_s_exact",      "p_s_bound", "profit_bound", "profit_formula", "forfeits"};
  return {
      {Experiment::fpr_estimate,
       "fpr-estimate",
       {integer("m", "1024", "bits"), integer("k", "7", "hash functions"), integer("n", "100", "set size"),
        integer("u", "1048576", "universe size"), hash_choice("public"),
        integer("builds", "100", "independent filters sharing the queries")},
       100000,
       {"false_positives", "fpr", "ci_lo", "ci_hi", "fpr_formula", "fill_ratio"},
       run_fpr},
      {Experiment::privacy_audit,
       "privacy-audit",
       {choice("mode", "mangat", {"mangat", "warner"}, "randomized response variant"),
        real("p", "0.5", "response probability"), integer("u", "100", "universe size"),
        integer("s", "10", "set size; S = {0..s-1}"),
        choice("direction", "remove", {"remove", "add"}, "neighbour: S - {0} or S + {s}")},
       20000,
       {"epsilon", "epsilon_prime", "epsilon_claimed", "bound", "freq_input", "freq_neighbor", "ratio", "ratio_lo",
        "ratio_hi", "verdict"},
       run_privacy_audit},
      {Experiment::bp_attack,
       "bp-attack",
       {integer("m", "8", "bits"), integer("k", "3", "hash functions"), integer("n", "20", "set size"),
        integer("t", "16", "query budget"), real("delta", "0.5", "payout parameter"),
        integer("u", "65536", "universe size"), hash_choice("true-random"),
        choice("adversary", "saturation", {"saturation", "random"}, "adversary strategy")},
       10000,
       games_metrics_bp,
       run_bp},
      {Experiment::ab_game,
       "ab-game",
       {integer("m", "1024", "bits"), integer("k", "7", "hash functions"), integer("n", "100", "set size"),
        integer("t", "10", "query budget"), integer("u", "1048576", "universe size"), hash_choice("public"),
        choice("adversary", "random", {"random", "saturation"}, "adversary strategy")},
       10000,
       {"win_rate", "ci_lo", "ci_hi", "wins", "forfeits", "fpr_formula"},
       run_ab},
      {Experiment::filic_distinguish,
       "filic-distinguish",
       {integer("m", "64", "bits"), integer("k", "4", "hash functions"), integer("n", "10", "set size"),
        integer("u", "65536", "universe size"),
        choice("filter", "key-leaking-ny", {"key-leaking-ny", "standard", "prf", "true-random", "ny"},
               "real-world filter"),
        choice("adversary", "key-reading", {"key-reading", "colliding", "null", "ab-random", "ab-saturation"},
               "adversary strategy"),
        integer("q_u", "0", "insert budget"), integer("q_t", "1", "membership budget"),
        integer("q_v", "1", "reveal budget")},
       1000,
       {"p_real", "p_ideal", "advantage", "ci_lo", "ci_hi"},
       run_filic},
      {Experiment::saturation_scan,
       "saturation-scan",
       {integer("m", "8", "bits"), integer("n", "20", "set size"), integer("k", "3", "hash functions"),
        real("delta", "0.5", "payout parameter")},
       10000,
       {"p_s_exact", "p_s_bound", "sat_rate", "ci_lo", "ci_hi", "profit_bound", "optimal_k", "optimal_k_attack"},
       run_saturation},
      {Experiment::error_analysis,
       "error-analysis",
       {choice("mode", "warner", {"mangat", "warner", "none"}, "perturbation"), real("p", "0.75", "response probability"),
        integer("m", "256", "bits"), integer("k", "3", "hash functions"), integer("n", "20", "sizing cardinality"),
        integer("u", "256", "universe size"), integer("s", "20", "set size")},
       1000,
       {"fpr", "fpr_se", "fpr_formula", "fnr", "fnr_se", "fnr_formula", "perturbed_size", "perturbed_size_formula"},
       run_error_analysis},
  };
}

}  // namespace

const ExperimentDef& definition(Experiment e) {
  static const std::vector<ExperimentDef> defs = make_definitions();
  for (const auto& d : defs) {
    if (d.id == e) return d;
  }
  throw ConfigError("unknown experiment");
}

}  // namespace rbf::harness::detail
