#include "farlab/curiosity/rnd_module.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "farlab/nnkit/serialize.hpp"
#include "farlab/rng.hpp"

namespace farlab::curiosity {

using nlohmann::json;

namespace {

std::vector<int> net_sizes(const RndConfig& cfg) { return {cfg.obs_dim, cfg.hidden, cfg.out_dim}; }

void check_dims(const RndConfig& cfg) {
  if (cfg.obs_dim <= 0 || cfg.out_dim <= 0 || cfg.hidden <= 0)
    throw std::invalid_argument("RND dimensions must be positive");
}

}  // namespace

json rnd_config_to_json(const RndConfig& c) {
  return {{"obs_dim", c.obs_dim},         {"out_dim", c.out_dim},
          {"hidden", c.hidden},           {"lr", c.lr},
          {"surprisal_ema", c.surprisal_ema}, {"standardize_obs", c.standardize_obs}};
}

RndConfig rnd_config_from_json(const json& doc) {
  RndConfig c;
  c.obs_dim = doc.value("obs_dim", c.obs_dim);
  c.out_dim = doc.value("out_dim", c.out_dim);
  c.hidden = doc.value("hidden", c.hidden);
  c.lr = doc.value("lr", c.lr);
  c.surprisal_ema = doc.value("surprisal_ema", c.surprisal_ema);
  c.standardize_obs = doc.value("standardize_obs", c.standardize_obs);
  return c;
}

FeatureExtractor FeatureExtractor::random(const RndConfig& cfg, std::uint64_t seed) {
  check_dims(cfg);
  const auto sizes = net_sizes(cfg);
  return FeatureExtractor(std::make_shared<const nnkit::DenseNet>(nnkit::DenseNet::mlp(sizes, seed)));
}

void ObsNormalizer::update(std::span<const double> obs) {
  if (dims.size() != obs.size()) dims.assign(obs.size(), RunningStat{});
  for (std::size_t i = 0; i < obs.size(); ++i) dims[i].push(obs[i]);
}

std::vector<double> ObsNormalizer::apply(std::span<const double> obs) const {
  std::vector<double> out(obs.begin(), obs.end());
  if (dims.size() != obs.size()) return out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double sd = dims[i].stddev();
    const double z = sd > 1e-8 ? (obs[i] - dims[i].mean()) / sd : obs[i] - dims[i].mean();
    out[i] = std::clamp(z, -5.0, 5.0);
  }
  return out;
}

RndModule RndModule::create(const RndConfig& cfg, std::uint64_t seed,
                            std::optional<FeatureExtractor> shared_target) {
  check_dims(cfg);
  RndModule m;
  m.config_ = cfg;
  if (shared_target && *shared_target) {
    if (shared_target->input_dim() != cfg.obs_dim || shared_target->feature_dim() != cfg.out_dim)
      throw std::invalid_argument("shared target dimensions do not match RND config");
    m.target_ = *shared_target;
  } else {
    m.target_ = FeatureExtractor::random(cfg, derive_seed(seed, 0x7a));
  }
  const auto sizes = net_sizes(cfg);
  m.predictor_ = nnkit::DenseNet::mlp(sizes, seed);
  m.adam_ = nnkit::AdamState(m.predictor_.param_count(), nnkit::AdamConfig{.lr = cfg.lr});
  m.surprisal_ = RunningStat(cfg.surprisal_ema);
  return m;
}

std::vector<double> RndModule::prepare(std::span<const double> obs) const {
  if (static_cast<int>(obs.size()) != config_.obs_dim)
    throw std::invalid_argument("RND observation has " + std::to_string(obs.size()) +
                                " dims, expected " + std::to_string(config_.obs_dim));
  if (config_.standardize_obs) return normalizer_.apply(obs);
  return {obs.begin(), obs.end()};
}

double RndModule::reward(std::span<const double> obs) const {
  const auto x = prepare(obs);
  return nnkit::mse(predictor_.forward(x), target_.net()->forward(x));
}

double RndModule::score(std::span<const double> obs) {
  const double r = reward(obs);
  surprisal_.push(r);
  return r;
}

double RndModule::train(std::span<const std::vector<double>> batch) {
  if (batch.empty()) throw std::invalid_argument("rnd_train: empty batch");
  if (config_.standardize_obs)
    for (const auto& obs : batch) normalizer_.update(obs);
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> targets;
  xs.reserve(batch.size());
  targets.reserve(batch.size());
  for (const auto& obs : batch) {
    xs.push_back(prepare(obs));
    targets.push_back(target_.net()->forward(xs.back()));
  }
  auto lg = nnkit::mse_batch_loss_and_grads(predictor_, xs, targets);
  nnkit::adam_step(adam_, predictor_.params(), lg.grads);
  return lg.loss;
}

double RndModule::train(std::span<const double> obs) {
  const std::vector<std::vector<double>> batch{std::vector<double>(obs.begin(), obs.end())};
  return train(batch);
}

bool RndModule::same_state(const RndModule& other) const {
  return config_ == other.config_ && target() == other.target() &&
         predictor_ == other.predictor_ && adam_ == other.adam_ &&
         surprisal_ == other.surprisal_ && normalizer_ == other.normalizer_ &&
         birth_step_ == other.birth_step_;
}

json RndModule::to_json(bool include_target) const {
  json doc{{"config", rnd_config_to_json(config_)},
           {"predictor", nnkit::net_to_json(predictor_)},
           {"adam", nnkit::adam_to_json(adam_)},
           {"surprisal_stats", surprisal_.to_json()},
           {"birth_step", birth_step_}};
  if (include_target) doc["target"] = nnkit::net_to_json(target());
  if (config_.standardize_obs) {
    json dims = json::array();
    for (const auto& d : normalizer_.dims) dims.push_back(d.to_json());
    doc["obs_normalizer"] = std::move(dims);
  }
  return doc;
}

RndModule RndModule::from_json(const json& doc, std::optional<FeatureExtractor> shared_target) {
  RndModule m;
  m.config_ = rnd_config_from_json(doc.at("config"));
  if (doc.contains("target")) {
    m.target_ = FeatureExtractor(
        std::make_shared<const nnkit::DenseNet>(nnkit::net_from_json(doc.at("target"))));
  } else if (shared_target && *shared_target) {
    m.target_ = *shared_target;
  } else {
    throw std::runtime_error("RND module document has no target and none was supplied");
  }
  m.predictor_ = nnkit::net_from_json(doc.at("predictor"));
  m.adam_ = nnkit::adam_from_json(doc.at("adam"));
  m.surprisal_ = RunningStat::from_json(doc.at("surprisal_stats"));
  m.birth_step_ = doc.at("birth_step").get<std::int64_t>();
  if (doc.contains("obs_normalizer"))
    for (const auto& d : doc.at("obs_normalizer")) m.normalizer_.dims.push_back(RunningStat::from_json(d));
  if (m.predictor_.input_size() != m.config_.obs_dim || m.target().input_size() != m.config_.obs_dim ||
      m.predictor_.output_size() != m.target().output_size())
    throw std::runtime_error("RND module document has inconsistent network shapes");
  return m;
}

}  // namespace farlab::curiosity
