#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "farlab/rng.hpp"

namespace farlab::envs {

enum class EpisodeRegime { reset_free, fixed, increasing };

std::string to_string(EpisodeRegime r);
EpisodeRegime regime_from_string(const std::string& s);

struct ToyGridConfig {
  int width = 10;
  int height = 10;
  int obs_dim = 32;
  EpisodeRegime regime = EpisodeRegime::reset_free;
  int fixed_length = 200;       // episode length in the fixed regime
  int increasing_unit = 10;     // episode n lasts increasing_unit * n steps
};

struct ToyStep {
  std::span<const double> obs;
  bool episode_ended = false;
};

// Grid of fixed random observations explored by a uniform random walk that
// never re-enters the start cell. Each step yields exactly one observation;
// when an episode ends the agent is back on the start cell and the returned
// observation is the start observation of the next episode.
class ToyGrid {
 public:
  ToyGrid(const ToyGridConfig& cfg, std::uint64_t seed);

  ToyStep step(Rng& rng);

  /// Start-cell observation; does not move the agent.
  std::span<const double> probe_start() const { return cell_obs(start_x_, start_y_); }
  std::span<const double> current_obs() const { return cell_obs(x_, y_); }
  std::span<const double> cell_obs(int x, int y) const;

  /// Length of episode n (1-based); 0 for the reset-free regime.
  std::int64_t episode_length(std::int64_t n) const;

  int x() const { return x_; }
  int y() const { return y_; }
  int start_x() const { return start_x_; }
  int start_y() const { return start_y_; }
  std::int64_t episode() const { return episode_; }
  std::int64_t t() const { return t_; }
  const ToyGridConfig& config() const { return config_; }
  const std::vector<double>& table() const { return table_; }

 private:
  ToyGridConfig config_;
  std::vector<double> table_;  // (y * width + x) * obs_dim
  int start_x_ = 5;
  int start_y_ = 5;
  int x_ = 5;
  int y_ = 5;
  std::int64_t episode_ = 1;
  std::int64_t t_ = 0;
};

}  // namespace farlab::envs
