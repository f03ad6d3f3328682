#include "farlab/envs/toy_grid.hpp"

#include <stdexcept>

namespace farlab::envs {

std::string to_string(EpisodeRegime r) {
  switch (r) {
    case EpisodeRegime::fixed: return "fixed";
    case EpisodeRegime::increasing: return "increasing";
    default: return "reset-free";
  }
}

EpisodeRegime regime_from_string(const std::string& s) {
  if (s == "reset-free" || s == "resetfree") return EpisodeRegime::reset_free;
  if (s == "fixed") return EpisodeRegime::fixed;
  if (s == "increasing") return EpisodeRegime::increasing;
  throw std::invalid_argument("unknown episode regime '" + s + "'");
}

ToyGrid::ToyGrid(const ToyGridConfig& cfg, std::uint64_t seed) : config_(cfg) {
  if (cfg.width < 2 || cfg.height < 2 || cfg.obs_dim <= 0)
    throw std::invalid_argument("toy grid needs width, height >= 2 and obs_dim > 0");
  if (cfg.fixed_length <= 0 || cfg.increasing_unit <= 0)
    throw std::invalid_argument("toy grid episode lengths must be positive");
  Rng rng(seed);
  table_.resize(static_cast<std::size_t>(cfg.width) * cfg.height * cfg.obs_dim);
  for (double& v : table_) v = rng.uniform();
  start_x_ = cfg.width / 2;
  start_y_ = cfg.height / 2;
  x_ = start_x_;
  y_ = start_y_;
}

std::span<const double> ToyGrid::cell_obs(int x, int y) const {
  const std::size_t offset = (static_cast<std::size_t>(y) * config_.width + x) * config_.obs_dim;
  return std::span<const double>(table_).subspan(offset, config_.obs_dim);
}

std::int64_t ToyGrid::episode_length(std::int64_t n) const {
  switch (config_.regime) {
    case EpisodeRegime::fixed: return config_.fixed_length;
    case EpisodeRegime::increasing: return config_.increasing_unit * n;
    default: return 0;
  }
}

ToyStep ToyGrid::step(Rng& rng) {
  static constexpr int dx[4] = {0, 0, -1, 1};
  static constexpr int dy[4] = {-1, 1, 0, 0};
  for (;;) {
    const auto dir = rng.below(4);
    const int nx = x_ + dx[dir];
    const int ny = y_ + dy[dir];
    if (nx < 0 || ny < 0 || nx >= config_.width || ny >= config_.height) continue;
    if (nx == start_x_ && ny == start_y_) continue;
    x_ = nx;
    y_ = ny;
    break;
  }
  ++t_;
  const std::int64_t length = episode_length(episode_);
  if (length > 0 && t_ >= length) {
    x_ = start_x_;
    y_ = start_y_;
    t_ = 0;
    ++episode_;
    return {probe_start(), true};
  }
  return {current_obs(), false};
}

}  // namespace farlab::envs
