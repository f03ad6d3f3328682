#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "farlab/curiosity/rnd_module.hpp"
#include "farlab/memory/long_term_memory.hpp"

namespace farlab::memory {

enum class FragmentCriterion { ratio, zscore };
enum class EventKind { none, fragmented, recalled };

std::string to_string(EventKind kind);
std::string to_string(FragmentCriterion c);
FragmentCriterion criterion_from_string(const std::string& s);

struct FarConfig {
  curiosity::RndConfig rnd;
  double rho = 10.0;          // surprisal / running-average threshold
  double rho_z = 3.0;         // z-score threshold when criterion == zscore
  double psi = 0.99;          // recall cosine threshold
  double sim_cap = 0.75;      // skip fragmentation above this similarity to any key
  int warmup = 50;            // surprisal samples before a module may fragment
  int refractory = 0;         // steps after a structural event with no further events
  std::size_t capacity = 800;
  FragmentCriterion criterion = FragmentCriterion::ratio;
  bool recall_enabled = true;

  void validate() const;
  bool operator==(const FarConfig&) const = default;
};

nlohmann::json far_config_to_json(const FarConfig& c);
FarConfig far_config_from_json(const nlohmann::json& doc);

struct Event {
  std::int64_t step = 0;
  EventKind kind = EventKind::none;
  std::int64_t fragment_id = 0;  // module active after the event
  bool operator==(const Event&) const = default;
};

struct StepResult {
  double intrinsic_reward = 0.0;
  EventKind event = EventKind::none;
};

struct LtmStats {
  std::size_t n_fragments = 0;  // LTM entries plus the active module
  std::vector<Event> timeline;
};

// Fragmentation-and-recall controller. One RND module is active (the
// short-term memory); inactive modules live in the LTM keyed by the feature
// of the observation they were created on. All modules share one frozen
// target network, which doubles as the feature extractor for keys.
class FarCuriosity {
 public:
  FarCuriosity(const FarConfig& cfg, std::uint64_t seed);

  /// Recall, score, fragment, train, in that order. At most one structural
  /// event per call; recall wins over fragmentation.
  StepResult process_observation(std::span<const double> obs);

  /// Index of the most similar LTM entry at or above psi.
  std::optional<std::size_t> check_recall(std::span<const double> feat) const;

  /// Fragmentation test against the active module's current statistics.
  bool check_fragmentation(double surprisal, std::span<const double> feat) const;
  bool check_fragmentation(const curiosity::RunningStat& stats, double surprisal,
                           std::span<const double> feat) const;

  /// Stores the active module and activates a fresh one keyed by feat.
  void fragment(std::span<const double> feat);

  /// Swaps the active module with LTM entry `index`.
  void recall(std::size_t index);

  /// Reward the module that process_observation would use for obs, without
  /// changing any state.
  double probe_reward(std::span<const double> obs) const;

  std::vector<double> feature(std::span<const double> obs) const { return extractor_(obs); }

  LtmStats ltm_stats() const;
  std::size_t n_fragments() const { return ltm_.size() + 1; }

  const FarConfig& config() const { return config_; }
  const curiosity::RndModule& active() const { return active_; }
  curiosity::RndModule& active() { return active_; }
  std::int64_t active_id() const { return active_id_; }
  const std::optional<std::vector<double>>& active_key() const { return active_key_; }
  void set_active_key(std::vector<double> key) { active_key_ = std::move(key); }
  const LongTermMemory& ltm() const { return ltm_; }
  const std::vector<Event>& event_log() const { return events_; }
  std::int64_t global_step() const { return step_; }
  void set_global_step(std::int64_t step) { step_ = step; }
  const curiosity::FeatureExtractor& extractor() const { return extractor_; }

  /// Loss-free state document (versioned).
  nlohmann::json to_json() const;
  static FarCuriosity from_json(const nlohmann::json& doc);

  static constexpr int kFormatVersion = 1;

 private:
  FarCuriosity() = default;
  curiosity::RndModule new_module();
  void log(EventKind kind);
  void park_active();

  FarConfig config_;
  std::uint64_t seed_ = 0;
  curiosity::FeatureExtractor extractor_;
  curiosity::RndModule active_;
  std::int64_t active_id_ = 0;
  std::int64_t next_id_ = 1;
  std::optional<std::vector<double>> active_key_;
  LongTermMemory ltm_{1};
  std::vector<Event> events_;
  std::int64_t step_ = 0;
  std::int64_t last_event_step_ = -1;
};

}  // namespace farlab::memory
