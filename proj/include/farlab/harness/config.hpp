#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "farlab/agent/ppo.hpp"
#include "farlab/envs/multi_room.hpp"
#include "farlab/envs/toy_grid.hpp"
#include "farlab/memory/far_curiosity.hpp"

namespace farlab::harness {

enum class ExperimentKind {
  toygrid_resetfree,
  toygrid_fixed,
  toygrid_increasing,
  toygrid_far,
  two_region,
  multiroom_decay,
  multiroom_far,
};

enum class CuriosityKind { rnd, far, count };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);
std::string to_string(CuriosityKind k);
CuriosityKind curiosity_kind_from_string(const std::string& s);

bool is_toygrid(ExperimentKind k);
bool is_multiroom(ExperimentKind k);

struct TwoRegionConfig {
  int region_size = 16;       // observations per region
  double noise = 0.02;        // per-dimension jitter around the region center
  int blocks = 6;             // alternating A, B, A, ... blocks
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::toygrid_resetfree;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::int64_t steps = 200000;
  CuriosityKind curiosity = CuriosityKind::rnd;
  memory::FarConfig far;  // far.rnd also configures plain RND runs

  // toy grid and two-region stream
  envs::ToyGridConfig grid;
  envs::EpisodeRegime far_regime = envs::EpisodeRegime::reset_free;
  std::int64_t probe_interval = 200;
  bool normalize_by_running_mean = false;
  TwoRegionConfig two_region;

  // multi-room
  envs::MultiRoomConfig room;
  agent::PpoConfig ppo;
  std::vector<double> gamma_decays{0.999, 0.9995, 1.0};
  double c_int = 1.0;
  bool normalize_intrinsic = true;

  std::string out_dir = "runs/out";

  /// Throws ConfigError on invalid values.
  void validate() const;
};

/// Kind-specific defaults (curiosity kind, room count, budgets) applied
/// before the document's own fields.
ExperimentConfig defaults_for(ExperimentKind kind);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Reads a .json or .toml config file.
nlohmann::json load_config_document(const std::filesystem::path& path);

/// Applies `a.b.c=value` overrides to a config document. Values parse as
/// JSON when possible and fall back to strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// MD5 of the canonical config dump, hex encoded.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace farlab::harness
