#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "farlab/agent/ppo.hpp"
#include "farlab/curiosity/running_stat.hpp"
#include "farlab/curiosity/visit_counter.hpp"
#include "farlab/envs/multi_room.hpp"
#include "farlab/harness/config.hpp"
#include "farlab/memory/far_curiosity.hpp"
#include "farlab/harness/csv.hpp"

namespace farlab::harness {

inline constexpr const char* kCodeVersion = "farlab 1.0.0";

/// Start-observation probes of one toy-grid seed.
struct ToySeries {
  std::vector<std::int64_t> steps;
  std::vector<double> probe;
  std::vector<std::size_t> n_fragments;  // FAR only
  std::vector<std::string> events;       // FAR only
};

/// Monolithic RND and FARCuriosity fed the same two-region stream.
struct TwoRegionSeries {
  std::vector<std::int64_t> steps;
  std::vector<char> region;  // 'A' or 'B' block at the probe
  std::vector<double> rnd_probe;
  std::vector<double> far_probe;
  std::vector<std::size_t> n_fragments;
  std::vector<std::string> events;
  std::int64_t block_length = 0;
  std::size_t fragmentations = 0;
  std::size_t recalls = 0;
};

/// One PPO training run on the multi-room grid.
struct MultiRoomSeries {
  double gamma_decay = 1.0;
  std::vector<std::int64_t> steps;
  std::vector<double> mean_return;          // rolling mean of the last 100 episodes
  std::vector<double> first_obs_intrinsic;  // mean over episodes started in the window
  std::vector<std::size_t> n_fragments;     // FAR only
  double final_return = 0.0;                // mean over episodes ending in the last 10% of steps
  std::size_t episodes = 0;
};

// PPO on the multi-room grid with a count-based or FARCuriosity bonus.
// Environments are stepped round-robin, so the shared curiosity state sees
// observations in a fixed order.
class MultiRoomTrainer {
 public:
  MultiRoomTrainer(const ExperimentConfig& cfg, std::uint64_t seed, double gamma_decay);

  /// Collects one rollout of rollout_len x n_envs steps and runs one PPO update.
  void iterate();

  std::int64_t total_steps() const { return total_steps_; }
  const agent::PpoAgent& agent() const { return agent_; }
  const std::optional<curiosity::VisitCounter>& counter() const { return counter_; }
  const std::optional<memory::FarCuriosity>& far() const { return far_; }

  /// Extrinsic returns of episodes finished during the last iterate().
  const std::vector<double>& finished_returns() const { return finished_; }
  /// Intrinsic reward (peeked) of the first observation of episodes started
  /// during the last iterate().
  const std::vector<double>& first_obs_intrinsic() const { return first_obs_; }

 private:
  double intrinsic(const envs::MultiRoomObs& obs, const std::vector<double>& encoded);
  double peek_intrinsic(const envs::MultiRoomObs& obs, const std::vector<double>& encoded) const;
  void start_episode(std::size_t env);

  ExperimentConfig cfg_;
  std::vector<envs::MultiRoom> envs_;
  std::vector<envs::MultiRoomObs> obs_;
  std::vector<std::vector<double>> encoded_;
  std::vector<double> episode_return_;
  agent::PpoAgent agent_;
  agent::RolloutBuffer buffer_;
  std::optional<curiosity::VisitCounter> counter_;
  std::optional<memory::FarCuriosity> far_;
  curiosity::RunningStat intrinsic_stats_;
  Rng policy_rng_;
  Rng episode_rng_;
  std::int64_t total_steps_ = 0;
  std::vector<double> finished_;
  std::vector<double> first_obs_;
};

ToySeries run_toygrid(const ExperimentConfig& cfg, std::uint64_t seed);
TwoRegionSeries run_two_region(const ExperimentConfig& cfg, std::uint64_t seed);
/// gamma_decay is used by count-based curiosity only.
MultiRoomSeries run_multiroom(const ExperimentConfig& cfg, std::uint64_t seed, double gamma_decay);

/// Observations of the two-region stream: [0, region_size) region A,
/// [region_size, 2 * region_size) region B.
std::vector<std::vector<double>> two_region_observations(const ExperimentConfig& cfg, std::uint64_t seed);

struct RunOutcome {
  std::vector<std::filesystem::path> files;
  double wall_seconds = 0.0;
};

/// Runs every seed (in parallel up to FARLAB_THREADS), writes one CSV per
/// seed, an aggregate CSV (mean and stderr across seeds) and manifest.json
/// into cfg.out_dir.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// One-at-a-time sensitivity sweep: rho in {5, 10, 15} with psi fixed,
/// psi in {0.95, 0.975, 0.99} with rho fixed. Each setting runs into its own
/// subdirectory; sweep.csv summarizes them.
RunOutcome run_sweep(const ExperimentConfig& cfg);

/// Seed-level thread cap from FARLAB_THREADS (default: available processors).
int seed_threads();

// Per-kind CSV tables, shared by run_experiment and the tests.
CsvTable toy_seed_table(const ToySeries& s, bool far);
CsvTable toy_aggregate_table(const std::vector<ToySeries>& runs, bool far);
CsvTable two_region_seed_table(const TwoRegionSeries& s);
CsvTable two_region_aggregate_table(const std::vector<TwoRegionSeries>& runs);
CsvTable multiroom_seed_table(const std::vector<MultiRoomSeries>& per_gamma, bool far);
CsvTable multiroom_aggregate_table(const std::vector<std::vector<MultiRoomSeries>>& per_seed, bool far);

}  // namespace farlab::harness
