#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rbf/games.hpp"

namespace rbf {

/// Ideal-world state: bit array M, a lazily sampled random function f
/// shared by build and insert, the inserted and false-positive lists, and
/// the distinct-insertion counter.
///
/// Both lists are append-only. An element that was first reported as a
/// false positive and later inserted sits on both.
class SimulatorState {
 public:
  SimulatorState(std::uint64_t m, std::uint32_t k, std::uint64_t seed);

  /// Sets f(x) for every x in s, appends each to `inserted`.
  void sim_build(const ElementSet& s);
  /// 1 for listed elements. Otherwise samples k fresh uniform indices,
  /// ignoring x, and answers 1 (recording x as a false positive) iff all
  /// are set.
  bool sim_query(Element x);
  /// No-op for elements already inserted.
  void sim_insert(Element x);
  /// M in the snapshot layout of a standard public-hash filter.
  std::vector<std::uint8_t> sim_reveal() const;

  const BitArray& bits() const noexcept { return bits_; }
  const std::vector<Element>& inserted() const noexcept { return inserted_; }
  const std::vector<Element>& fp_list() const noexcept { return fp_list_; }
  std::uint64_t ctr() const noexcept { return ctr_; }
  bool is_inserted(Element x) const { return inserted_set_.contains(x); }
  bool is_false_positive(Element x) const { return fp_set_.contains(x); }
  /// f(x); draws it if x has not been seen by build or insert.
  std::vector<std::uint64_t> f(Element x) const { return f_.derive(x, m_, k_); }

 private:
  std::uint64_t m_;
  std::uint32_t k_;
  BitArray bits_;
  HashFamily f_;
  Rng query_rng_;
  std::vector<Element> inserted_;
  std::vector<Element> fp_list_;
  ElementSet inserted_set_;
  ElementSet fp_set_;
  std::uint64_t ctr_ = 0;
};

struct OracleBudget {
  std::uint64_t q_u = 0;  // insert queries
  std::uint64_t q_t = 0;  // membership queries
  std::uint64_t q_v = 0;  // reveal queries
  // Recorded only; not enforced.
  double t_a = 0.0;
  double t_s = 0.0;
  double t_d = 0.0;
};

enum class Reply : std::uint8_t { zero = 0, one = 1, refused = 2 };

/// The three oracles an adversary sees. Calls beyond the budget or on
/// elements outside the universe are refused, and a refused run's output is
/// replaced by the refusal token.
class Oracles {
 public:
  virtual ~Oracles() = default;

  virtual Reply query(Element x) = 0;
  /// False on refusal.
  virtual bool insert(Element x) = 0;
  virtual std::optional<std::vector<std::uint8_t>> reveal() = 0;
};

/// Adversary output; nullopt is the refusal token.
using Output = std::optional<std::int64_t>;

struct FilicConfig {
  Universe universe{1};
  std::uint64_t n = 0;
  /// Shape of the ideal simulator's bit array.
  std::uint64_t m = 1;
  std::uint32_t k = 1;

  void validate() const;
};

class FilicAdversary {
 public:
  virtual ~FilicAdversary() = default;

  virtual ElementSet choose_set(const FilicConfig& cfg, Rng& rng) = 0;
  virtual Output run(Oracles& oracles, Rng& rng) = 0;
};

using FilicAdversaryFactory = std::function<std::unique_ptr<FilicAdversary>()>;

class Distinguisher {
 public:
  virtual ~Distinguisher() = default;
  virtual bool decide(const Output& out, Rng& rng) const = 0;
};

/// d = 1 iff out == 1. Refusals decide 0.
std::shared_ptr<const Distinguisher> identity_distinguisher();

/// Real world: oracles backed by the filter the factory builds on S.
bool run_real(FilicAdversary& adversary, const FilterFactory& factory, const Distinguisher& distinguisher,
              const FilicConfig& cfg, const OracleBudget& budget, std::uint64_t seed);
/// Ideal world: oracles backed by a SimulatorState built on S.
bool run_ideal(FilicAdversary& adversary, const Distinguisher& distinguisher, const FilicConfig& cfg,
               const OracleBudget& budget, std::uint64_t seed);

inline constexpr std::uint64_t kMinAdvantageTrials = 1000;

struct AdvantageReport {
  OracleBudget budget;
  std::uint64_t trials = 0;
  std::uint64_t real_ones = 0;
  std::uint64_t ideal_ones = 0;
  double p_real = 0.0;
  double p_ideal = 0.0;
  double advantage = 0.0;  // |p_real - p_ideal|
  Interval ci;             // Newcombe hybrid Wilson interval, folded to [0, 1]

  /// {"q_u","q_t","q_v","trials","p_real","p_ideal","advantage","ci_lo","ci_hi"}
  std::string to_json() const;
};

/// Runs `trials` independent Real and Ideal experiments. Throws
/// ParameterError below kMinAdvantageTrials.
AdvantageReport estimate_advantage(const FilicAdversaryFactory& adversary, const FilterFactory& factory,
                                   std::shared_ptr<const Distinguisher> distinguisher, const FilicConfig& cfg,
                                   const OracleBudget& budget, std::uint64_t trials, std::uint64_t seed);

/// Wraps an AB adversary: forwards its set, relays up to q_t - 1 adaptive
/// queries through the membership oracle, spends the last query on x* and
/// outputs that bit. Rule violations of the AB game output 0. The
/// distinguisher is the identity.
std::pair<FilicAdversaryFactory, std::shared_ptr<const Distinguisher>> ab_to_filic_adversary(
    AdversaryFactory ab_adversary, std::uint64_t q_t);

/// Insertable Naor-Yogev filter whose revealed representation carries the
/// permutation key at kSnapshotKeyOffset. The inner filter uses public
/// hashing.
NyFilter key_leaking_ny_filter(const ElementSet& s, const FilterParams& params, const Universe& universe,
                               const Key& key);
FilterFactory key_leaking_ny_factory(const FilterParams& params, const Universe& universe);

/// Reads the key from one reveal call, searches (in random order, up to
/// `search_limit` candidates) for a non-member whose permuted public-hash
/// indices are all set in the revealed bits, queries it once and outputs
/// the answer. Outputs 0 if no candidate is found.
std::unique_ptr<FilicAdversary> key_reading_adversary(std::uint64_t search_limit = 1u << 16);

/// Same search against a plain public-hash filter: no key needed, the
/// indices are public.
std::unique_ptr<FilicAdversary> colliding_query_adversary(std::uint64_t search_limit = 1u << 16);

/// Chooses a random set and outputs a constant without touching the oracles.
std::unique_ptr<FilicAdversary> null_adversary(std::int64_t constant = 1);

}  // namespace rbf
