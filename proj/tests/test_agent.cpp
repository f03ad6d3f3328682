#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "farlab/agent/gae.hpp"
#include "farlab/agent/ppo.hpp"
#include "farlab/nnkit/kernels.hpp"
#include "farlab/rng.hpp"

using namespace farlab;
using namespace farlab::agent;

namespace {

// Three one-hot states, two actions.
struct ToyBatch {
  std::vector<std::vector<double>> obs;
  std::vector<int> actions;
  std::vector<double> old_logp, adv, ret;
  std::vector<std::size_t> idx;

  PpoSamples samples() const { return {obs, actions, old_logp, adv, ret}; }
};

ToyBatch toy_batch(const PpoAgent& agent, Rng& rng, double logp_jitter) {
  ToyBatch b;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> o(3, 0.0);
    o[i % 3] = 1.0;
    const int a = static_cast<int>(rng.below(2));
    const auto p = agent.probs(o);
    b.obs.push_back(o);
    b.actions.push_back(a);
    b.old_logp.push_back(std::log(p[a]) + rng.uniform(-logp_jitter, logp_jitter));
    b.adv.push_back(rng.uniform(-1, 1));
    b.ret.push_back(rng.uniform(-1, 1));
    b.idx.push_back(static_cast<std::size_t>(i));
  }
  return b;
}

double policy_objective(const PpoAgent& agent, const ToyBatch& b) {
  std::vector<double> pg, vg;
  const auto r = ppo_loss_and_grads(agent, b.samples(), b.idx, pg, vg, nnkit::kernels::Exec::serial);
  return r.policy - agent.config().entropy_coef * r.entropy;
}

}  // namespace

TEST(Gae, WorkedTwoStepExample) {
  const std::vector<double> r{1, 0}, v{0.5, 0.5, 0};
  const std::vector<std::uint8_t> d{0, 0};
  const auto g = gae(r, v, d, 0.99, 0.95);
  EXPECT_NEAR(g.advantages[1], -0.5, 1e-12);
  EXPECT_NEAR(g.advantages[0], 0.52475, 1e-9);
  EXPECT_NEAR(g.returns[0], g.advantages[0] + 0.5, 1e-12);
}

TEST(Gae, LambdaZeroIsTdError) {
  Rng rng(1);
  const std::size_t T = 50;
  std::vector<double> r(T), v(T + 1);
  std::vector<std::uint8_t> d(T);
  for (auto& x : r) x = rng.uniform(-1, 1);
  for (auto& x : v) x = rng.uniform(-1, 1);
  for (auto& x : d) x = rng.below(10) == 0;
  const auto g = gae(r, v, d, 0.97, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double delta = r[t] + 0.97 * v[t + 1] * (1 - d[t]) - v[t];
    EXPECT_NEAR(g.advantages[t], delta, 1e-12);
  }
}

TEST(Gae, DoneSeversBootstrap) {
  const std::vector<double> r{0.3, 2.0}, v{0.1, 5.0, 7.0};
  const std::vector<std::uint8_t> d{1, 0};
  const auto g = gae(r, v, d, 0.99, 0.95);
  EXPECT_DOUBLE_EQ(g.advantages[0], 0.3 - 0.1);
}

TEST(Gae, UndiscountedEpisodeIsReturnMinusValue) {
  const std::vector<double> r{1, 2, 3, 4}, v{0.5, -1, 2, 0.25, 9};
  const std::vector<std::uint8_t> d{0, 0, 0, 1};
  const auto g = gae(r, v, d, 1.0, 1.0);
  double tail = 0;
  for (int t = 3; t >= 0; --t) {
    tail += r[t];
    EXPECT_NEAR(g.advantages[t], tail - v[t], 1e-12);
  }
}

TEST(Rewards, CombineRewards) {
  EXPECT_EQ(combine_rewards(0.7, 5.0, 0.0), 0.7);
  EXPECT_EQ(combine_rewards(0.0, 0.5, 1.0), 0.5);
  EXPECT_THROW(combine_rewards(0.0, 0.5, -1.0), std::invalid_argument);
}

TEST(Sampling, UniformLogitsAreUniform) {
  Rng rng(3);
  const std::vector<double> logits(4, 0.0);
  const auto p = softmax(logits);
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_categorical(p, rng)];
  for (int c : counts) EXPECT_NEAR(c / double(n), 0.25, 0.01);
}

TEST(Sampling, PeakedLogits) {
  Rng rng(4);
  const std::vector<double> logits{10, -10, -10};
  const auto p = softmax(logits);
  int zero = 0;
  for (int i = 0; i < 10000; ++i) zero += sample_categorical(p, rng) == 0;
  EXPECT_GT(zero / 10000.0, 0.999);
  EXPECT_NEAR(entropy(std::vector<double>{0.5, 0.5}), std::log(2.0), 1e-15);
}

TEST(PpoAgent, SameSeedSameAction) {
  PpoAgent a(5, 3, PpoConfig{}, 9), b(5, 3, PpoConfig{}, 9);
  const std::vector<double> o{0.1, 0.2, 0.3, 0.4, 0.5};
  Rng r1(2), r2(2);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.act(o, r1).action, b.act(o, r2).action);
}

TEST(PpoAgent, FreshPolicyIsNearUniform) {
  PpoAgent a(8, 7, PpoConfig{}, 1);
  const auto p = a.probs(std::vector<double>(8, 1.0));
  for (double x : p) EXPECT_NEAR(x, 1.0 / 7.0, 0.02);
}

TEST(PpoLoss, RatioOneGivesVanillaPolicyGradient) {
  PpoConfig cfg;
  cfg.entropy_coef = 0.0;
  PpoAgent agent(3, 2, cfg, 5);
  Rng rng(5);
  const auto b = toy_batch(agent, rng, 0.0);
  std::vector<double> pg, vg;
  const auto rep = ppo_loss_and_grads(agent, b.samples(), b.idx, pg, vg);
  EXPECT_EQ(rep.clip_fraction, 0.0);

  // -mean(A * d log pi(a|s)) by central differences.
  PpoAgent probe = agent;
  auto params = probe.policy().params();
  const double h = 1e-6;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto objective = [&]() {
      double s = 0;
      for (std::size_t i = 0; i < b.obs.size(); ++i)
        s += b.adv[i] * std::log(probe.probs(b.obs[i])[b.actions[i]]);
      return -s / static_cast<double>(b.obs.size());
    };
    const double keep = params[k];
    params[k] = keep + h;
    const double up = objective();
    params[k] = keep - h;
    const double down = objective();
    params[k] = keep;
    EXPECT_NEAR(pg[k], (up - down) / (2 * h), 1e-6 + 1e-4 * std::abs(pg[k]));
  }
}

TEST(PpoLoss, SurrogateGradientMatchesFiniteDifferences) {
  PpoConfig cfg;
  cfg.entropy_coef = 0.01;
  PpoAgent agent(3, 2, cfg, 6);
  Rng rng(6);
  const auto b = toy_batch(agent, rng, 0.05);
  std::vector<double> pg, vg;
  ppo_loss_and_grads(agent, b.samples(), b.idx, pg, vg, nnkit::kernels::Exec::serial);

  PpoAgent probe = agent;
  auto params = probe.policy().params();
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double keep = params[k];
    params[k] = keep + h;
    const double up = policy_objective(probe, b);
    params[k] = keep - h;
    const double down = policy_objective(probe, b);
    params[k] = keep;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - pg[k]) / std::max({std::abs(fd), std::abs(pg[k]), 1e-7}));
  }
  EXPECT_LT(worst, 1e-3);

  // Value head: value_coef * mse.
  auto vparams = probe.value_net().params();
  for (std::size_t k = 0; k < vparams.size(); k += 7) {
    auto loss = [&]() {
      std::vector<double> a, c;
      return cfg.value_coef * ppo_loss_and_grads(probe, b.samples(), b.idx, a, c).value;
    };
    const double keep = vparams[k];
    vparams[k] = keep + h;
    const double up = loss();
    vparams[k] = keep - h;
    const double down = loss();
    vparams[k] = keep;
    EXPECT_NEAR(vg[k], (up - down) / (2 * h), 1e-6 + 1e-4 * std::abs(vg[k]));
  }
}

TEST(PpoLoss, SerialAndParallelAgree) {
  PpoAgent agent(3, 2, PpoConfig{}, 7);
  Rng rng(7);
  const auto b = toy_batch(agent, rng, 0.3);
  std::vector<double> p1, v1, p2, v2;
  const auto a = ppo_loss_and_grads(agent, b.samples(), b.idx, p1, v1, nnkit::kernels::Exec::serial);
  const auto c = ppo_loss_and_grads(agent, b.samples(), b.idx, p2, v2, nnkit::kernels::Exec::parallel);
  EXPECT_NEAR(a.policy, c.policy, 1e-12);
  for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_NEAR(p1[i], p2[i], 1e-12);
  for (std::size_t i = 0; i < v1.size(); ++i) EXPECT_NEAR(v1[i], v2[i], 1e-12);
}

TEST(RolloutBuffer, EqualAdvantagesSkipNormalization) {
  PpoConfig cfg;
  cfg.rollout_len = 4;
  cfg.n_envs = 2;
  cfg.minibatches = 2;
  PpoAgent agent(3, 2, cfg, 8);
  RolloutBuffer buf(2, 4);
  for (int t = 0; t < 4; ++t)
    for (int e = 0; e < 2; ++e) {
      std::vector<double> o(3, 0.0);
      o[t % 3] = 1.0;
      buf.add(e, o, 0, std::log(0.5), 0.0, 0.0, 0.0, 0.0, false);
    }
  EXPECT_TRUE(buf.full());
  const std::vector<double> boot{0.0, 0.0};
  buf.compute_advantages(boot, cfg.gamma, cfg.lambda);
  for (double a : buf.advantages) EXPECT_EQ(a, 0.0);
  const auto rep = agent.update(buf);
  EXPECT_TRUE(std::isfinite(rep.policy));
  EXPECT_TRUE(std::isfinite(rep.value));
}

TEST(PpoAgent, UpdateLearnsABandit) {
  // One state, action 1 pays 1, others 0: the policy must concentrate on 1.
  PpoConfig cfg;
  cfg.lr = 3e-3;
  cfg.rollout_len = 16;
  cfg.n_envs = 4;
  PpoAgent agent(2, 3, cfg, 11);
  Rng rng(11);
  const std::vector<double> o{1.0, 0.0};
  for (int it = 0; it < 40; ++it) {
    RolloutBuffer buf(cfg.n_envs, cfg.rollout_len);
    for (int t = 0; t < cfg.rollout_len; ++t)
      for (int e = 0; e < cfg.n_envs; ++e) {
        const auto a = agent.act(o, rng);
        const double r = a.action == 1 ? 1.0 : 0.0;
        buf.add(e, o, a.action, a.log_prob, a.value, r, 0.0, r, true);
      }
    const std::vector<double> boot(cfg.n_envs, 0.0);
    buf.compute_advantages(boot, cfg.gamma, cfg.lambda);
    agent.update(buf);
  }
  EXPECT_GT(agent.probs(o)[1], 0.9);
}

TEST(PpoAgent, JsonRoundTrip) {
  PpoAgent a(4, 3, PpoConfig{}, 12);
  auto b = PpoAgent::from_json(nlohmann::json::parse(a.to_json().dump()));
  EXPECT_TRUE(a.same_state(b));
}
