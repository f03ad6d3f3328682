#include "farlab/harness/state_io.hpp"

#include <fstream>

#include "farlab/envs/multi_room.hpp"
#include "farlab/envs/toy_grid.hpp"
#include "farlab/harness/errors.hpp"
#include "farlab/harness/experiments.hpp"
#include "farlab/rng.hpp"

namespace farlab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStateFormat = "farlab-state";

double score(LabState& s, std::span<const double> obs) {
  if (s.far) return s.far->process_observation(obs).intrinsic_reward;
  const double r = s.rnd->reward(obs);
  s.rnd->train(obs);
  return r;
}

}  // namespace

LabState build_state(const ExperimentConfig& cfg, std::uint64_t seed, std::int64_t steps) {
  cfg.validate();
  if (steps < 0) throw ConfigError("steps must be >= 0");
  LabState s;
  s.config = cfg;
  s.seed = seed;
  s.steps = steps;

  if (is_multiroom(cfg.kind)) {
    MultiRoomTrainer trainer(cfg, seed, cfg.gamma_decays.empty() ? 1.0 : cfg.gamma_decays.front());
    while (trainer.total_steps() < steps) trainer.iterate();
    s.steps = trainer.total_steps();
    s.agent = trainer.agent();
    s.counter = trainer.counter();
    s.far = trainer.far();
    return s;
  }

  const std::uint64_t cseed = derive_seed(seed, 12);
  if (cfg.curiosity == CuriosityKind::far)
    s.far.emplace(cfg.far, cseed);
  else if (cfg.curiosity == CuriosityKind::rnd)
    s.rnd = curiosity::RndModule::create(cfg.far.rnd, cseed);
  else
    throw ConfigError("count curiosity is only used by multiroom experiments");

  if (cfg.kind == ExperimentKind::two_region) {
    const auto obs = two_region_observations(cfg, seed);
    const std::size_t k = static_cast<std::size_t>(cfg.two_region.region_size);
    const std::int64_t block = std::max<std::int64_t>(1, cfg.steps / cfg.two_region.blocks);
    Rng pick(derive_seed(seed, 13));
    for (std::int64_t t = 0; t < steps; ++t) {
      const std::size_t region = static_cast<std::size_t>(std::min<std::int64_t>(t / block, cfg.two_region.blocks - 1) % 2);
      score(s, obs[region * k + pick.below(k)]);
    }
  } else {
    envs::ToyGrid env(cfg.grid, derive_seed(seed, 10));
    Rng walk(derive_seed(seed, 11));
    std::span<const double> o = env.current_obs();
    for (std::int64_t t = 0; t < steps; ++t) {
      score(s, o);
      o = env.step(walk).obs;
    }
  }
  return s;
}

json state_to_json(const LabState& s) {
  json doc{{"format", kStateFormat},
           {"version", kStateVersion},
           {"config", to_json(s.config)},
           {"metadata", {{"seed", s.seed}, {"steps", s.steps}, {"config_hash", config_hash(s.config)}}}};
  if (s.far) doc["far"] = s.far->to_json();
  if (s.rnd) doc["rnd"] = s.rnd->to_json();
  if (s.counter) doc["counter"] = s.counter->to_json();
  if (s.agent) doc["agent"] = s.agent->to_json();
  return doc;
}

LabState state_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string()) != kStateFormat) throw ConfigError("not a farlab state document");
    const int version = doc.at("version").get<int>();
    if (version != kStateVersion) throw VersionMismatchError(kStateVersion, version);
    LabState s;
    s.config = config_from_json(doc.at("config"));
    s.seed = doc.at("metadata").at("seed").get<std::uint64_t>();
    s.steps = doc.at("metadata").at("steps").get<std::int64_t>();
    if (doc.contains("far")) s.far = memory::FarCuriosity::from_json(doc.at("far"));
    if (doc.contains("rnd")) s.rnd = curiosity::RndModule::from_json(doc.at("rnd"));
    if (doc.contains("counter")) s.counter = curiosity::VisitCounter::from_json(doc.at("counter"));
    if (doc.contains("agent")) s.agent = agent::PpoAgent::from_json(doc.at("agent"));
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed state document: ") + e.what());
  }
}

void save_state(const fs::path& path, const LabState& s) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << state_to_json(s).dump() << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

LabState load_state(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse state file " + path.string() + ": " + e.what());
  }
  return state_from_json(doc);
}

ProbeSequence probe_sequence(const ExperimentConfig& cfg, std::uint64_t probe_seed, std::size_t k) {
  ProbeSequence seq;
  Rng rng(probe_seed);
  if (is_multiroom(cfg.kind)) {
    // A random-policy walk through freshly generated layouts.
    envs::MultiRoom env(cfg.room);
    envs::MultiRoomObs obs = env.reset(rng.next_u64());
    while (seq.raw.size() < k) {
      seq.raw.push_back(obs);
      seq.dense.push_back(envs::one_hot(obs));
      auto st = env.step(static_cast<int>(rng.below(envs::kNumActions)));
      obs = st.done ? env.reset(rng.next_u64()) : std::move(st.obs);
    }
    return seq;
  }
  const int d = cfg.far.rnd.obs_dim;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> o(static_cast<std::size_t>(d));
    for (auto& v : o) v = rng.uniform();
    seq.dense.push_back(std::move(o));
  }
  return seq;
}

std::vector<double> run_probe(LabState& s, const ProbeSequence& seq) {
  std::vector<double> out;
  out.reserve(seq.dense.size());
  for (std::size_t i = 0; i < seq.dense.size(); ++i) {
    if (s.counter)
      out.push_back(s.counter->reward(curiosity::key_of(std::span<const std::uint8_t>(seq.raw[i]))));
    else if (s.far || s.rnd)
      out.push_back(score(s, seq.dense[i]));
    else
      throw ConfigError("state holds no curiosity learner");
  }
  return out;
}

}  // namespace farlab::harness
