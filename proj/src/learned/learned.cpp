#include "rbf/learned.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace rbf {

TrainingDataset make_training_set(const ElementSet& s, const Universe& universe,
                                  std::uint64_t negatives_count, std::uint64_t seed) {
  universe.check(s);
  if (negatives_count > universe.size - s.size()) {
    throw ParameterError("cannot draw " + std::to_string(negatives_count) +
                         " negatives from a complement of size " + std::to_string(universe.size - s.size()));
  }
  Rng rng(seed);
  TrainingDataset data;
  data.positives = s;
  data.negatives = sample_distinct(rng, universe, negatives_count, s);
  data.pairs.reserve(s.size() + negatives_count);
  for (Element x : data.positives) data.pairs.emplace_back(x, true);
  for (Element x : data.negatives) data.pairs.emplace_back(x, false);
  return data;
}

bool LearningModel::flipped(Element x) const {
  // Top 53 bits of the keyed coin as a uniform double in [0, 1).
  const double u = static_cast<double>(keyed_prf(coin_key_, 0, x) >> 11) * 0x1.0p-53;
  return u < noise_;
}

double LearningModel::score(Element x) const {
  const auto it = labels_.find(x);
  if (it == labels_.end()) return 0.0;
  const bool label = it->second;
  if (!flipped(x)) return label ? 1.0 : 0.0;
  return label ? tau_ / 2.0 : (1.0 + tau_) / 2.0;
}

namespace {

Key coin_key_for(std::uint64_t seed) {
  Rng rng(derive_seed(seed, tag_of("learned-model-coins"), 0));
  return random_key(rng);
}

double rate_with_slack(std::uint64_t errors, std::uint64_t total) {
  if (total == 0) return 0.0;
  const double r = static_cast<double>(errors) / static_cast<double>(total);
  return std::min(1.0, r + 3.0 * std::sqrt(r * (1.0 - r) / static_cast<double>(total)));
}

}  // namespace

LearningModel train_threshold_model(const TrainingDataset& data, double noise, std::uint64_t seed,
                                    double tau) {
  if (!(noise >= 0.0 && noise < 0.5)) throw ParameterError("noise must lie in [0, 1/2)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ParameterError("tau must lie in [0, 1]");
  LearningModel model;
  model.tau_ = tau;
  model.noise_ = noise;
  model.seed_ = seed;
  model.coin_key_ = coin_key_for(seed);
  for (const auto& [x, y] : data.pairs) model.labels_[x] = y;

  std::uint64_t false_pos = 0;
  std::uint64_t false_neg = 0;
  for (Element x : data.negatives) false_pos += model.positive(x);
  for (Element x : data.positives) false_neg += !model.positive(x);
  model.eps_p_ = rate_with_slack(false_pos, data.negatives.size());
  model.eps_n_ = rate_with_slack(false_neg, data.positives.size());
  return model;
}

std::string LearningModel::to_json() const {
  nlohmann::ordered_json j;
  j["tau"] = tau_;
  j["eps_p"] = eps_p_;
  j["eps_n"] = eps_n_;
  j["noise"] = noise_;
  j["seed"] = seed_;
  return j.dump();
}

LearningModel LearningModel::from_json(const std::string& json, const TrainingDataset& data) {
  const auto j = nlohmann::json::parse(json);
  LearningModel model = train_threshold_model(data, j.at("noise").get<double>(),
                                              j.at("seed").get<std::uint64_t>(), j.at("tau").get<double>());
  model.eps_p_ = j.at("eps_p").get<double>();
  model.eps_n_ = j.at("eps_n").get<double>();
  return model;
}

LearnedFilter LearnedFilter::build(const ElementSet& s, const Universe& universe, const FilterParams& fparams,
                                   LearningModel model, HashFamily backup_hash) {
  universe.check(s);
  ElementSet backup_set;
  for (Element x : s) {
    if (!model.positive(x)) backup_set.insert(backup_set.end(), x);
  }
  BloomFilter backup = BloomFilter::build(backup_set, fparams, universe, std::move(backup_hash));
  return LearnedFilter(std::move(model), std::move(backup), std::move(backup_set), s);
}

LearnedFilter LearnedFilter::build(const ElementSet& s, const Universe& universe, const FilterParams& fparams,
                                   LearningModel model) {
  Rng rng(derive_seed(model.seed(), tag_of("learned-backup-key"), 0));
  const Key key = random_key(rng);
  return build(s, universe, fparams, std::move(model), HashFamily::keyed(key));
}

LearnedFilter learned_pipeline(const ElementSet& s, const Universe& universe, const FilterParams& fparams,
                               const LearnedConfig& cfg, std::uint64_t seed) {
  const std::uint64_t negatives = std::min<std::uint64_t>(cfg.negatives_count, universe.size - s.size());
  const auto data = make_training_set(s, universe, negatives, derive_seed(seed, tag_of("learned-data"), 0));
  auto model = train_threshold_model(data, cfg.noise, derive_seed(seed, tag_of("learned-model"), 0), cfg.tau);
  return LearnedFilter::build(s, universe, fparams, std::move(model));
}

PrivateLearnedFilter private_learned_build(const ElementSet& s, const Universe& universe,
                                           const FilterParams& fparams, const PrivacyParams& privacy,
                                           const LearnedConfig& cfg, std::uint64_t seed) {
  PerturbedSet set = perturb(s, universe, privacy, derive_seed(seed, tag_of("learned-perturb"), 0));
  LearnedFilter filter = learned_pipeline(set.perturbed, universe, fparams, cfg,
                                          derive_seed(seed, tag_of("learned-pipeline"), 0));
  return {std::move(set), std::move(filter)};
}

}  // namespace rbf
