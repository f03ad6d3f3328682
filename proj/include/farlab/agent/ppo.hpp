#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "farlab/nnkit/adam.hpp"
#include "farlab/nnkit/dense_net.hpp"
#include "farlab/nnkit/kernels.hpp"
#include "farlab/rng.hpp"

namespace farlab::agent {

struct PpoConfig {
  double lr = 1e-4;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.1;
  double value_coef = 1.0;
  double entropy_coef = 0.001;
  int epochs = 4;
  int minibatches = 4;
  int rollout_len = 128;
  int n_envs = 8;
  int hidden = 64;
  /// Global gradient-norm clip per network; 0 disables.
  double max_grad_norm = 0.0;

  bool operator==(const PpoConfig&) const = default;
};

nlohmann::json ppo_config_to_json(const PpoConfig& c);
PpoConfig ppo_config_from_json(const nlohmann::json& doc);

/// r = r_ext + c_int * intrinsic (the intrinsic value is expected to be
/// normalized by the caller).
double combine_rewards(double extrinsic, double intrinsic, double c_int);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
double entropy(std::span<const double> probs);

struct ActResult {
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
};

/// Samples from Categorical(softmax(logits)).
int sample_categorical(std::span<const double> probs, Rng& rng);

/// Uniform random policy.
struct RandomPolicy {
  int n_actions = 1;
  int act(Rng& rng) const { return static_cast<int>(rng.below(static_cast<std::size_t>(n_actions))); }
};

// Fixed-horizon rollout storage, laid out [t][env].
class RolloutBuffer {
 public:
  RolloutBuffer(int n_envs, int horizon);

  void add(int env, std::vector<double> obs, int action, double log_prob, double value,
           double extrinsic, double intrinsic, double reward, bool done);
  bool full() const;
  void clear();

  /// Fills advantages/returns from the combined reward; `bootstrap` holds
  /// V(s_T) for every environment.
  void compute_advantages(std::span<const double> bootstrap, double gamma, double lambda);

  int n_envs() const { return n_envs_; }
  int horizon() const { return horizon_; }
  std::size_t size() const { return static_cast<std::size_t>(n_envs_) * horizon_; }
  std::size_t index(int t, int env) const { return static_cast<std::size_t>(t) * n_envs_ + env; }

  std::vector<std::vector<double>> obs;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> extrinsic;
  std::vector<double> intrinsic;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<double> advantages;
  std::vector<double> returns;
  bool advantages_ready = false;

 private:
  int n_envs_;
  int horizon_;
  std::vector<int> filled_;
};

/// Training samples referenced by a minibatch.
struct PpoSamples {
  std::span<const std::vector<double>> obs;
  std::span<const int> actions;
  std::span<const double> old_log_probs;
  std::span<const double> advantages;
  std::span<const double> returns;
};

struct LossReport {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

class PpoAgent;

/// Clipped-surrogate loss over `indices` and its gradients:
/// policy - entropy_coef * entropy for the policy net, value_coef * mse for
/// the value net. Means over the minibatch.
LossReport ppo_loss_and_grads(const PpoAgent& agent, const PpoSamples& samples,
                              std::span<const std::size_t> indices, std::vector<double>& policy_grad,
                              std::vector<double>& value_grad,
                              nnkit::kernels::Exec exec = nnkit::kernels::Exec::parallel);

// Actor-critic with separate policy and value MLPs.
class PpoAgent {
 public:
  PpoAgent(int obs_dim, int n_actions, const PpoConfig& cfg, std::uint64_t seed);

  ActResult act(std::span<const double> obs, Rng& rng) const;
  std::vector<ActResult> act_batch(std::span<const std::vector<double>> obs, Rng& rng) const;
  std::vector<double> probs(std::span<const double> obs) const;
  double value(std::span<const double> obs) const;

  /// epochs x minibatches Adam steps over the buffer.
  LossReport update(RolloutBuffer& buffer);

  const PpoConfig& config() const { return config_; }
  const nnkit::DenseNet& policy() const { return policy_; }
  nnkit::DenseNet& policy() { return policy_; }
  const nnkit::DenseNet& value_net() const { return value_; }
  nnkit::DenseNet& value_net() { return value_; }
  int obs_dim() const { return policy_.input_size(); }
  int n_actions() const { return policy_.output_size(); }

  nlohmann::json to_json() const;
  static PpoAgent from_json(const nlohmann::json& doc);
  bool same_state(const PpoAgent& other) const;

 private:
  PpoAgent() = default;

  PpoConfig config_;
  nnkit::DenseNet policy_;
  nnkit::DenseNet value_;
  nnkit::AdamState policy_adam_;
  nnkit::AdamState value_adam_;
  Rng shuffle_rng_;
};

}  // namespace farlab::agent
