#include "farlab/memory/far_curiosity.hpp"

#include <stdexcept>

#include "farlab/nnkit/serialize.hpp"
#include "farlab/rng.hpp"

namespace farlab::memory {

using nlohmann::json;

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::fragmented: return "fragmented";
    case EventKind::recalled: return "recalled";
    default: return "none";
  }
}

std::string to_string(FragmentCriterion c) { return c == FragmentCriterion::ratio ? "ratio" : "zscore"; }

FragmentCriterion criterion_from_string(const std::string& s) {
  if (s == "ratio") return FragmentCriterion::ratio;
  if (s == "zscore") return FragmentCriterion::zscore;
  throw std::invalid_argument("unknown fragmentation criterion '" + s + "'");
}

namespace {

EventKind event_from_string(const std::string& s) {
  if (s == "fragmented") return EventKind::fragmented;
  if (s == "recalled") return EventKind::recalled;
  if (s == "none") return EventKind::none;
  throw std::runtime_error("unknown event kind '" + s + "'");
}

}  // namespace

void FarConfig::validate() const {
  if (!(rho > 1.0)) throw std::invalid_argument("rho must be > 1");
  if (!(psi > 0.0 && psi <= 1.0)) throw std::invalid_argument("psi must lie in (0, 1]");
  if (!(sim_cap >= 0.0 && sim_cap < 1.0)) throw std::invalid_argument("sim_cap must lie in [0, 1)");
  if (warmup < 0 || refractory < 0) throw std::invalid_argument("warmup/refractory must be >= 0");
  if (capacity == 0) throw std::invalid_argument("LTM capacity must be positive");
}

json far_config_to_json(const FarConfig& c) {
  return {{"rnd", curiosity::rnd_config_to_json(c.rnd)},
          {"rho", c.rho},
          {"rho_z", c.rho_z},
          {"psi", c.psi},
          {"sim_cap", c.sim_cap},
          {"warmup", c.warmup},
          {"refractory", c.refractory},
          {"capacity", c.capacity},
          {"criterion", to_string(c.criterion)},
          {"recall_enabled", c.recall_enabled}};
}

FarConfig far_config_from_json(const json& doc) {
  FarConfig c;
  if (doc.contains("rnd")) c.rnd = curiosity::rnd_config_from_json(doc.at("rnd"));
  c.rho = doc.value("rho", c.rho);
  c.rho_z = doc.value("rho_z", c.rho_z);
  c.psi = doc.value("psi", c.psi);
  c.sim_cap = doc.value("sim_cap", c.sim_cap);
  c.warmup = doc.value("warmup", c.warmup);
  c.refractory = doc.value("refractory", c.refractory);
  c.capacity = doc.value("capacity", c.capacity);
  c.criterion = criterion_from_string(doc.value("criterion", to_string(c.criterion)));
  c.recall_enabled = doc.value("recall_enabled", c.recall_enabled);
  return c;
}

FarCuriosity::FarCuriosity(const FarConfig& cfg, std::uint64_t seed)
    : config_(cfg), seed_(seed), ltm_(cfg.capacity) {
  config_.validate();
  extractor_ = curiosity::FeatureExtractor::random(cfg.rnd, derive_seed(seed, 0x7a));
  active_id_ = next_id_;
  active_ = new_module();
}

curiosity::RndModule FarCuriosity::new_module() {
  const std::int64_t id = next_id_++;
  auto m = curiosity::RndModule::create(config_.rnd, derive_seed(seed_, 1000 + static_cast<std::uint64_t>(id)),
                                        extractor_);
  m.set_birth_step(step_);
  return m;
}

void FarCuriosity::log(EventKind kind) {
  events_.push_back({step_, kind, active_id_});
  last_event_step_ = step_;
}

void FarCuriosity::park_active() {
  FragmentEntry e;
  e.id = active_id_;
  e.key = active_key_ ? *active_key_ : std::vector<double>(extractor_.feature_dim(), 0.0);
  e.module = std::move(active_);
  e.last_used = step_;
  ltm_.store(std::move(e));
}

std::optional<std::size_t> FarCuriosity::check_recall(std::span<const double> feat) const {
  return ltm_.best_match(feat, config_.psi);
}

bool FarCuriosity::check_fragmentation(double surprisal, std::span<const double> feat) const {
  return check_fragmentation(active_.surprisal_stats(), surprisal, feat);
}

bool FarCuriosity::check_fragmentation(const curiosity::RunningStat& stats, double surprisal,
                                       std::span<const double> feat) const {
  if (stats.count() < config_.warmup) return false;

  bool novel = false;
  if (config_.criterion == FragmentCriterion::ratio) {
    const double avg = stats.running_average();
    novel = avg < 1e-12 ? true : surprisal / avg > config_.rho;
  } else {
    const double sd = stats.stddev();
    const double diff = surprisal - stats.mean();
    novel = sd < 1e-12 ? diff > 0.0 : diff / sd > config_.rho_z;
  }
  if (!novel) return false;

  return ltm_.empty() || ltm_.max_similarity(feat) < config_.sim_cap;
}

void FarCuriosity::fragment(std::span<const double> feat) {
  if (!active_key_) active_key_ = std::vector<double>(feat.begin(), feat.end());
  park_active();
  active_id_ = next_id_;
  active_ = new_module();
  active_key_ = std::vector<double>(feat.begin(), feat.end());
  log(EventKind::fragmented);
}

void FarCuriosity::recall(std::size_t index) {
  FragmentEntry e = ltm_.take(index);
  park_active();
  active_ = std::move(e.module);
  active_id_ = e.id;
  active_key_ = std::move(e.key);
  log(EventKind::recalled);
}

StepResult FarCuriosity::process_observation(std::span<const double> obs) {
  const auto feat = extractor_(obs);
  if (!active_key_) active_key_ = feat;

  const bool may_event = last_event_step_ < 0 || step_ - last_event_step_ >= config_.refractory;

  StepResult result;
  if (may_event && config_.recall_enabled) {
    if (const auto idx = check_recall(feat)) {
      recall(*idx);
      result.event = EventKind::recalled;
    }
  }

  const curiosity::RunningStat before = active_.surprisal_stats();
  result.intrinsic_reward = active_.score(obs);

  if (may_event && result.event == EventKind::none &&
      check_fragmentation(before, result.intrinsic_reward, feat)) {
    fragment(feat);
    result.event = EventKind::fragmented;
  }

  active_.train(obs);
  ++step_;
  return result;
}

double FarCuriosity::probe_reward(std::span<const double> obs) const {
  if (config_.recall_enabled) {
    const auto feat = extractor_(obs);
    if (const auto idx = check_recall(feat)) return ltm_.at(*idx).module.reward(obs);
  }
  return active_.reward(obs);
}

LtmStats FarCuriosity::ltm_stats() const { return {n_fragments(), events_}; }

json FarCuriosity::to_json() const {
  json entries = json::array();
  for (const auto& e : ltm_.entries())
    entries.push_back({{"id", e.id}, {"key", e.key}, {"last_used", e.last_used},
                       {"module", e.module.to_json(false)}});
  json events = json::array();
  for (const auto& e : events_)
    events.push_back({{"step", e.step}, {"kind", to_string(e.kind)}, {"fragment_id", e.fragment_id}});

  return {{"version", kFormatVersion},
          {"config", far_config_to_json(config_)},
          {"seed", seed_},
          {"extractor", nnkit::net_to_json(*extractor_.net())},
          {"active", active_.to_json(false)},
          {"active_id", active_id_},
          {"next_id", next_id_},
          {"active_key", active_key_ ? json(*active_key_) : json(nullptr)},
          {"ltm", std::move(entries)},
          {"events", std::move(events)},
          {"global_step", step_},
          {"last_event_step", last_event_step_}};
}

FarCuriosity FarCuriosity::from_json(const json& doc) {
  const int version = doc.at("version").get<int>();
  if (version != kFormatVersion)
    throw std::runtime_error("FARCuriosity state version mismatch: expected " +
                             std::to_string(kFormatVersion) + ", found " + std::to_string(version));
  FarCuriosity fc;
  fc.config_ = far_config_from_json(doc.at("config"));
  fc.config_.validate();
  fc.seed_ = doc.at("seed").get<std::uint64_t>();
  fc.extractor_ = curiosity::FeatureExtractor(
      std::make_shared<const nnkit::DenseNet>(nnkit::net_from_json(doc.at("extractor"))));
  fc.active_ = curiosity::RndModule::from_json(doc.at("active"), fc.extractor_);
  fc.active_id_ = doc.at("active_id").get<std::int64_t>();
  fc.next_id_ = doc.at("next_id").get<std::int64_t>();
  if (!doc.at("active_key").is_null()) fc.active_key_ = doc.at("active_key").get<std::vector<double>>();
  fc.ltm_ = LongTermMemory(fc.config_.capacity);
  for (const auto& e : doc.at("ltm")) {
    FragmentEntry entry;
    entry.id = e.at("id").get<std::int64_t>();
    entry.key = e.at("key").get<std::vector<double>>();
    entry.last_used = e.at("last_used").get<std::int64_t>();
    entry.module = curiosity::RndModule::from_json(e.at("module"), fc.extractor_);
    fc.ltm_.store(std::move(entry));
  }
  for (const auto& e : doc.at("events"))
    fc.events_.push_back({e.at("step").get<std::int64_t>(), event_from_string(e.at("kind").get<std::string>()),
                          e.at("fragment_id").get<std::int64_t>()});
  fc.step_ = doc.at("global_step").get<std::int64_t>();
  fc.last_event_step_ = doc.at("last_event_step").get<std::int64_t>();
  return fc;
}

}  // namespace farlab::memory
