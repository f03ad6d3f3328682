#include "farlab/agent/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "farlab/agent/gae.hpp"
#include "farlab/nnkit/serialize.hpp"

namespace farlab::agent {

using nlohmann::json;
namespace kernels = nnkit::kernels;

json ppo_config_to_json(const PpoConfig& c) {
  return {{"lr", c.lr},
          {"gamma", c.gamma},
          {"lambda", c.lambda},
          {"clip", c.clip},
          {"value_coef", c.value_coef},
          {"entropy_coef", c.entropy_coef},
          {"epochs", c.epochs},
          {"minibatches", c.minibatches},
          {"rollout_len", c.rollout_len},
          {"n_envs", c.n_envs},
          {"hidden", c.hidden},
          {"max_grad_norm", c.max_grad_norm}};
}

PpoConfig ppo_config_from_json(const json& doc) {
  PpoConfig c;
  c.lr = doc.value("lr", c.lr);
  c.gamma = doc.value("gamma", c.gamma);
  c.lambda = doc.value("lambda", c.lambda);
  c.clip = doc.value("clip", c.clip);
  c.value_coef = doc.value("value_coef", c.value_coef);
  c.entropy_coef = doc.value("entropy_coef", c.entropy_coef);
  c.epochs = doc.value("epochs", c.epochs);
  c.minibatches = doc.value("minibatches", c.minibatches);
  c.rollout_len = doc.value("rollout_len", c.rollout_len);
  c.n_envs = doc.value("n_envs", c.n_envs);
  c.hidden = doc.value("hidden", c.hidden);
  c.max_grad_norm = doc.value("max_grad_norm", c.max_grad_norm);
  return c;
}

double combine_rewards(double extrinsic, double intrinsic, double c_int) {
  if (c_int < 0.0) throw std::invalid_argument("intrinsic coefficient must be >= 0");
  return extrinsic + c_int * intrinsic;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  const double lse = mx + std::log(s);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  auto out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u beyond the last partial sum: pick the last nonzero entry.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return static_cast<int>(i);
  return 0;
}

RolloutBuffer::RolloutBuffer(int n_envs, int horizon) : n_envs_(n_envs), horizon_(horizon) {
  if (n_envs <= 0 || horizon <= 0) throw std::invalid_argument("rollout buffer needs n_envs, horizon > 0");
  clear();
}

void RolloutBuffer::clear() {
  const std::size_t n = size();
  obs.assign(n, {});
  actions.assign(n, 0);
  log_probs.assign(n, 0.0);
  values.assign(n, 0.0);
  extrinsic.assign(n, 0.0);
  intrinsic.assign(n, 0.0);
  rewards.assign(n, 0.0);
  dones.assign(n, 0);
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  filled_.assign(n_envs_, 0);
  advantages_ready = false;
}

void RolloutBuffer::add(int env, std::vector<double> o, int action, double log_prob, double value,
                        double ext, double intr, double reward, bool done) {
  if (env < 0 || env >= n_envs_) throw std::out_of_range("rollout buffer env index");
  const int t = filled_[env];
  if (t >= horizon_) throw std::out_of_range("rollout buffer is full for env " + std::to_string(env));
  const std::size_t i = index(t, env);
  obs[i] = std::move(o);
  actions[i] = action;
  log_probs[i] = log_prob;
  values[i] = value;
  extrinsic[i] = ext;
  intrinsic[i] = intr;
  rewards[i] = reward;
  dones[i] = done ? 1 : 0;
  filled_[env] = t + 1;
}

bool RolloutBuffer::full() const {
  return std::all_of(filled_.begin(), filled_.end(), [&](int f) { return f == horizon_; });
}

void RolloutBuffer::compute_advantages(std::span<const double> bootstrap, double gamma, double lambda) {
  if (!full()) throw std::logic_error("compute_advantages on an incomplete rollout");
  if (bootstrap.size() != static_cast<std::size_t>(n_envs_))
    throw std::invalid_argument("compute_advantages: one bootstrap value per env required");
  std::vector<double> r(horizon_), v(horizon_ + 1);
  std::vector<std::uint8_t> d(horizon_);
  for (int e = 0; e < n_envs_; ++e) {
    for (int t = 0; t < horizon_; ++t) {
      r[t] = rewards[index(t, e)];
      v[t] = values[index(t, e)];
      d[t] = dones[index(t, e)];
    }
    v[horizon_] = bootstrap[e];
    const auto g = gae(r, v, d, gamma, lambda);
    for (int t = 0; t < horizon_; ++t) {
      advantages[index(t, e)] = g.advantages[t];
      returns[index(t, e)] = g.returns[t];
    }
  }
  advantages_ready = true;
}

LossReport ppo_loss_and_grads(const PpoAgent& agent, const PpoSamples& s,
                              std::span<const std::size_t> indices, std::vector<double>& policy_grad,
                              std::vector<double>& value_grad, kernels::Exec exec) {
  if (indices.empty()) throw std::invalid_argument("ppo_loss_and_grads: empty minibatch");
  const PpoConfig& cfg = agent.config();
  const std::size_t B = indices.size();
  const double inv_b = 1.0 / static_cast<double>(B);
  const int A = agent.n_actions();

  std::vector<double> ent(B, 0.0);
  std::vector<std::uint8_t> clipped(B, 0);
  std::vector<double> surrogate(B, 0.0);

  policy_grad.assign(agent.policy().param_count(), 0.0);
  kernels::accumulate(exec, B, policy_grad,
                      [&](std::size_t k, nnkit::ForwardCache& cache, std::span<double> grad) {
                        const std::size_t i = indices[k];
                        nnkit::forward_cached(agent.policy(), s.obs[i], cache);
                        const auto logp = log_softmax(cache.output());
                        std::vector<double> p(logp.size());
                        for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::exp(logp[j]);
                        double h = 0.0;
                        for (std::size_t j = 0; j < p.size(); ++j) h -= p[j] * logp[j];

                        const int a = s.actions[i];
                        const double adv = s.advantages[i];
                        const double ratio = std::exp(logp[a] - s.old_log_probs[i]);
                        const double surr1 = ratio * adv;
                        const double surr2 = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
                        const bool unclipped = surr1 <= surr2;
                        surrogate[k] = unclipped ? surr1 : surr2;
                        clipped[k] = unclipped ? 0 : 1;
                        ent[k] = h;

                        std::vector<double> dz(A);
                        for (int j = 0; j < A; ++j) {
                          const double dlogp = (j == a ? 1.0 : 0.0) - p[j];
                          const double dpolicy = unclipped ? -ratio * adv * dlogp : 0.0;
                          const double dent = -p[j] * (logp[j] + h);
                          dz[j] = (dpolicy - cfg.entropy_coef * dent) * inv_b;
                        }
                        nnkit::backward(agent.policy(), cache, dz, grad);
                        return 0.0;
                      });

  value_grad.assign(agent.value_net().param_count(), 0.0);
  const double value_sum = kernels::accumulate(
      exec, B, value_grad, [&](std::size_t k, nnkit::ForwardCache& cache, std::span<double> grad) {
        const std::size_t i = indices[k];
        nnkit::forward_cached(agent.value_net(), s.obs[i], cache);
        const double diff = cache.output()[0] - s.returns[i];
        const double dv = 2.0 * cfg.value_coef * diff * inv_b;
        nnkit::backward(agent.value_net(), cache, std::span<const double>(&dv, 1), grad);
        return diff * diff;
      });

  LossReport r;
  for (std::size_t k = 0; k < B; ++k) {
    r.policy -= surrogate[k];
    r.entropy += ent[k];
    r.clip_fraction += clipped[k];
  }
  r.policy *= inv_b;
  r.entropy *= inv_b;
  r.clip_fraction *= inv_b;
  r.value = value_sum * inv_b;
  return r;
}

namespace {

void clip_norm(std::vector<double>& g, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& v : g) v *= scale;
  }
}

}  // namespace

PpoAgent::PpoAgent(int obs_dim, int n_actions, const PpoConfig& cfg, std::uint64_t seed)
    : config_(cfg), shuffle_rng_(derive_seed(seed, 3)) {
  if (obs_dim <= 0 || n_actions <= 0) throw std::invalid_argument("PPO agent dims must be positive");
  if (cfg.epochs <= 0 || cfg.minibatches <= 0) throw std::invalid_argument("PPO epochs/minibatches must be positive");
  const std::vector<int> psizes{obs_dim, cfg.hidden, cfg.hidden, n_actions};
  const std::vector<int> vsizes{obs_dim, cfg.hidden, cfg.hidden, 1};
  policy_ = nnkit::DenseNet::mlp(psizes, derive_seed(seed, 1));
  value_ = nnkit::DenseNet::mlp(vsizes, derive_seed(seed, 2));
  // Small output layer so the initial policy is near uniform.
  for (double& w : policy_.weight(policy_.num_layers() - 1)) w *= 0.01;
  policy_adam_ = nnkit::AdamState(policy_.param_count(), {.lr = cfg.lr});
  value_adam_ = nnkit::AdamState(value_.param_count(), {.lr = cfg.lr});
}

std::vector<double> PpoAgent::probs(std::span<const double> obs) const { return softmax(policy_.forward(obs)); }

double PpoAgent::value(std::span<const double> obs) const { return value_.forward(obs)[0]; }

ActResult PpoAgent::act(std::span<const double> obs, Rng& rng) const {
  const auto logp = log_softmax(policy_.forward(obs));
  std::vector<double> p(logp.size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::exp(logp[j]);
  ActResult r;
  r.action = sample_categorical(p, rng);
  r.log_prob = logp[r.action];
  r.value = value(obs);
  return r;
}

std::vector<ActResult> PpoAgent::act_batch(std::span<const std::vector<double>> obs, Rng& rng) const {
  const auto logits = kernels::forward_batch_parallel(policy_, obs);
  const auto values = kernels::forward_batch_parallel(value_, obs);
  std::vector<ActResult> out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto logp = log_softmax(logits[i]);
    std::vector<double> p(logp.size());
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::exp(logp[j]);
    out[i].action = sample_categorical(p, rng);
    out[i].log_prob = logp[out[i].action];
    out[i].value = values[i][0];
  }
  return out;
}

LossReport PpoAgent::update(RolloutBuffer& buffer) {
  if (buffer.size() == 0) throw std::invalid_argument("ppo_update: empty buffer");
  if (!buffer.advantages_ready) throw std::logic_error("ppo_update: advantages not computed");

  const std::size_t n = buffer.size();
  std::vector<double> adv = buffer.advantages;
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (sd >= 1e-8)
    for (double& a : adv) a = (a - mean) / sd;

  const PpoSamples samples{buffer.obs, buffer.actions, buffer.log_probs, adv, buffer.returns};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t mb = std::max<std::size_t>(1, n / static_cast<std::size_t>(config_.minibatches));

  LossReport total;
  int steps = 0;
  std::vector<double> pg, vg;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng_.below(i)]);
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t end = std::min(n, start + mb);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const LossReport r = ppo_loss_and_grads(*this, samples, idx, pg, vg);
      clip_norm(pg, config_.max_grad_norm);
      clip_norm(vg, config_.max_grad_norm);
      nnkit::adam_step(policy_adam_, policy_.params(), pg);
      nnkit::adam_step(value_adam_, value_.params(), vg);
      total.policy += r.policy;
      total.value += r.value;
      total.entropy += r.entropy;
      total.clip_fraction += r.clip_fraction;
      ++steps;
    }
  }
  total.policy /= steps;
  total.value /= steps;
  total.entropy /= steps;
  total.clip_fraction /= steps;
  return total;
}

json PpoAgent::to_json() const {
  return {{"config", ppo_config_to_json(config_)},
          {"policy", nnkit::net_to_json(policy_)},
          {"value", nnkit::net_to_json(value_)},
          {"policy_adam", nnkit::adam_to_json(policy_adam_)},
          {"value_adam", nnkit::adam_to_json(value_adam_)},
          {"shuffle_rng", shuffle_rng_.state()}};
}

PpoAgent PpoAgent::from_json(const json& doc) {
  PpoAgent a;
  a.config_ = ppo_config_from_json(doc.at("config"));
  a.policy_ = nnkit::net_from_json(doc.at("policy"));
  a.value_ = nnkit::net_from_json(doc.at("value"));
  a.policy_adam_ = nnkit::adam_from_json(doc.at("policy_adam"));
  a.value_adam_ = nnkit::adam_from_json(doc.at("value_adam"));
  a.shuffle_rng_.set_state(doc.at("shuffle_rng").get<std::string>());
  if (a.policy_adam_.m.size() != a.policy_.param_count() || a.value_adam_.m.size() != a.value_.param_count())
    throw std::runtime_error("agent checkpoint optimizer state does not match networks");
  return a;
}

bool PpoAgent::same_state(const PpoAgent& other) const {
  return config_ == other.config_ && policy_ == other.policy_ && value_ == other.value_ &&
         policy_adam_ == other.policy_adam_ && value_adam_ == other.value_adam_ &&
         shuffle_rng_ == other.shuffle_rng_;
}

}  // namespace farlab::agent
