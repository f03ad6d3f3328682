#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "farlab/agent/ppo.hpp"
#include "farlab/curiosity/rnd_module.hpp"
#include "farlab/curiosity/visit_counter.hpp"
#include "farlab/harness/config.hpp"
#include "farlab/memory/far_curiosity.hpp"

namespace farlab::harness {

inline constexpr int kStateVersion = 1;

/// Everything needed to resume curiosity scoring: the config plus whichever
/// learners the experiment kind uses.
struct LabState {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  std::optional<memory::FarCuriosity> far;
  std::optional<curiosity::RndModule> rnd;
  std::optional<curiosity::VisitCounter> counter;
  std::optional<agent::PpoAgent> agent;
};

/// Runs the configured observation stream (toy grid, two-region) or PPO
/// trainer (multi-room) for `steps` steps and captures the learners.
LabState build_state(const ExperimentConfig& cfg, std::uint64_t seed, std::int64_t steps);

nlohmann::json state_to_json(const LabState& s);
/// Throws VersionMismatchError for a foreign version, ConfigError otherwise.
LabState state_from_json(const nlohmann::json& doc);

void save_state(const std::filesystem::path& path, const LabState& s);
/// Parse failures (e.g. truncated files) raise ConfigError.
LabState load_state(const std::filesystem::path& path);

/// Deterministic probe observations for the state's experiment kind.
struct ProbeSequence {
  std::vector<std::vector<double>> dense;      // toy and one-hot multi-room inputs
  std::vector<std::vector<std::uint8_t>> raw;  // multi-room cell codes (count keys)
};
ProbeSequence probe_sequence(const ExperimentConfig& cfg, std::uint64_t probe_seed, std::size_t k);

/// Feeds the probe sequence through the mutating scoring path (training and
/// structural events included) and returns the intrinsic reward per step.
std::vector<double> run_probe(LabState& s, const ProbeSequence& seq);

}  // namespace farlab::harness
