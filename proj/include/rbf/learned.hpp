#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rbf/bloom_filter.hpp"
#include "rbf/private_mechanisms.hpp"

namespace rbf {

/// Labelled pairs (x, y): positives drawn from the set, negatives from its
/// complement.
struct TrainingDataset {
  std::vector<std::pair<Element, bool>> pairs;
  ElementSet positives;
  ElementSet negatives;
};

/// Uses every member of s as a positive and `negatives_count` uniform
/// non-members as negatives.
TrainingDataset make_training_set(const ElementSet& s, const Universe& universe,
                                  std::uint64_t negatives_count, std::uint64_t seed);

/// Memorized-score model. Training elements score 1 (positives) or 0
/// (negatives); each is pushed to the wrong side of tau with probability
/// `noise`, decided by a keyed coin on (seed, x). Elements never seen in
/// training score 0, so they are never positive through the model.
class LearningModel {
 public:
  double score(Element x) const;
  bool positive(Element x) const { return score(x) >= tau_; }

  double tau() const noexcept { return tau_; }
  /// Claimed bound on Pr[positive(x)] for non-members.
  double eps_p() const noexcept { return eps_p_; }
  /// Claimed bound on Pr[!positive(x)] for members.
  double eps_n() const noexcept { return eps_n_; }
  double noise() const noexcept { return noise_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// {"tau","eps_p","eps_n","noise","seed"}. Scores are rebuilt from the
  /// seed and the training set.
  std::string to_json() const;
  static LearningModel from_json(const std::string& json, const TrainingDataset& data);

 private:
  friend LearningModel train_threshold_model(const TrainingDataset&, double, std::uint64_t, double);

  bool flipped(Element x) const;

  double tau_ = 0.5;
  double eps_p_ = 0.0;
  double eps_n_ = 0.0;
  double noise_ = 0.0;
  std::uint64_t seed_ = 0;
  Key coin_key_{};
  std::unordered_map<Element, bool> labels_;
};

/// noise must lie in [0, 1/2); tau in [0, 1]. eps_p / eps_n are the measured
/// training error rates plus three binomial standard errors.
LearningModel train_threshold_model(const TrainingDataset& data, double noise, std::uint64_t seed,
                                    double tau = 0.5);

/// Model pre-filter plus a backup Bloom filter over the model's false
/// negatives {x in S : score(x) < tau}.
class LearnedFilter {
 public:
  static LearnedFilter build(const ElementSet& s, const Universe& universe, const FilterParams& fparams,
                             LearningModel model, HashFamily backup_hash);
  /// Backup keyed from the model seed.
  static LearnedFilter build(const ElementSet& s, const Universe& universe, const FilterParams& fparams,
                             LearningModel model);

  bool query(Element x) const { return model_.positive(x) || backup_.query(x); }

  const LearningModel& model() const noexcept { return model_; }
  const BloomFilter& backup() const noexcept { return backup_; }
  const ElementSet& backup_set() const noexcept { return backup_set_; }
  const ElementSet& encoded_set() const noexcept { return encoded_; }

 private:
  LearnedFilter(LearningModel model, BloomFilter backup, ElementSet backup_set, ElementSet encoded)
      : model_(std::move(model)), backup_(std::move(backup)),
        backup_set_(std::move(backup_set)), encoded_(std::move(encoded)) {}

  LearningModel model_;
  BloomFilter backup_;
  ElementSet backup_set_;
  ElementSet encoded_;
};

struct LearnedConfig {
  std::uint64_t negatives_count = 1000;
  double noise = 0.05;
  double tau = 0.5;
};

/// Training-set generation, model training and backup construction, all
/// driven by `s` and `seed` alone. Requests more negatives than the
/// complement holds are clamped to the complement size.
LearnedFilter learned_pipeline(const ElementSet& s, const Universe& universe, const FilterParams& fparams,
                               const LearnedConfig& cfg, std::uint64_t seed);

struct PrivateLearnedFilter {
  PerturbedSet set;
  LearnedFilter filter;
};

/// Perturbs s once, then runs the whole learned pipeline on the perturbed
/// set only. The privacy budget is that of the perturbation.
PrivateLearnedFilter private_learned_build(const ElementSet& s, const Universe& universe,
                                           const FilterParams& fparams, const PrivacyParams& privacy,
                                           const LearnedConfig& cfg, std::uint64_t seed);

}  // namespace rbf
