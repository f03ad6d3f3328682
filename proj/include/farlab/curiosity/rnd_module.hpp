#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "farlab/curiosity/running_stat.hpp"
#include "farlab/nnkit/adam.hpp"
#include "farlab/nnkit/dense_net.hpp"

namespace farlab::curiosity {

struct RndConfig {
  int obs_dim = 32;
  int out_dim = 64;
  int hidden = 64;
  double lr = 1e-3;
  /// EMA coefficient of the per-module surprisal running average.
  double surprisal_ema = 0.99;
  /// Per-dimension running standardization of observations, clipped to
  /// [-5, 5], applied before both networks.
  bool standardize_obs = false;

  bool operator==(const RndConfig&) const = default;
};

nlohmann::json rnd_config_to_json(const RndConfig& c);
RndConfig rnd_config_from_json(const nlohmann::json& doc);

/// Frozen network phi(.) shared by every curiosity fragment.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  explicit FeatureExtractor(std::shared_ptr<const nnkit::DenseNet> net) : net_(std::move(net)) {}

  static FeatureExtractor random(const RndConfig& cfg, std::uint64_t seed);

  std::vector<double> operator()(std::span<const double> obs) const { return net_->forward(obs); }
  int input_dim() const { return net_->input_size(); }
  int feature_dim() const { return net_->output_size(); }
  const std::shared_ptr<const nnkit::DenseNet>& net() const { return net_; }
  explicit operator bool() const { return static_cast<bool>(net_); }

 private:
  std::shared_ptr<const nnkit::DenseNet> net_;
};

/// Per-dimension running mean/variance used for optional observation
/// standardization.
struct ObsNormalizer {
  std::vector<RunningStat> dims;

  void update(std::span<const double> obs);
  std::vector<double> apply(std::span<const double> obs) const;
  bool operator==(const ObsNormalizer&) const = default;
};

// One curiosity fragment: frozen random target, trainable predictor, and
// the statistics of the surprisal it produced while active.
class RndModule {
 public:
  RndModule() = default;

  /// A fresh predictor from `seed`; the target aliases `shared_target` when
  /// given, otherwise it is initialized from a seed derived from `seed`.
  static RndModule create(const RndConfig& cfg, std::uint64_t seed,
                          std::optional<FeatureExtractor> shared_target = std::nullopt);

  /// Prediction error on obs. Pure read.
  double reward(std::span<const double> obs) const;

  /// reward() plus recording the value into surprisal_stats.
  double score(std::span<const double> obs);

  /// One Adam step on the batch-mean mse; returns the pre-step loss.
  double train(std::span<const std::vector<double>> batch);
  double train(std::span<const double> obs);

  const RndConfig& config() const { return config_; }
  const nnkit::DenseNet& target() const { return *target_.net(); }
  const FeatureExtractor& extractor() const { return target_; }
  const nnkit::DenseNet& predictor() const { return predictor_; }
  nnkit::DenseNet& predictor() { return predictor_; }
  const nnkit::AdamState& adam() const { return adam_; }
  const RunningStat& surprisal_stats() const { return surprisal_; }
  RunningStat& surprisal_stats() { return surprisal_; }
  std::int64_t birth_step() const { return birth_step_; }
  void set_birth_step(std::int64_t s) { birth_step_ = s; }

  /// Bit-level equality of all learnable state; targets compared by value.
  bool same_state(const RndModule& other) const;

  /// Embeds both networks unless include_target is false (the caller then
  /// supplies the shared target to from_json).
  nlohmann::json to_json(bool include_target = true) const;
  static RndModule from_json(const nlohmann::json& doc,
                             std::optional<FeatureExtractor> shared_target = std::nullopt);

 private:
  std::vector<double> prepare(std::span<const double> obs) const;

  RndConfig config_;
  FeatureExtractor target_;
  nnkit::DenseNet predictor_;
  nnkit::AdamState adam_;
  RunningStat surprisal_;
  ObsNormalizer normalizer_;
  std::int64_t birth_step_ = 0;
};

}  // namespace farlab::curiosity
