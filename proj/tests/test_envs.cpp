#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <queue>
#include <vector>

#include "farlab/envs/multi_room.hpp"
#include "farlab/envs/toy_grid.hpp"
#include "farlab/envs/trajectory.hpp"
#include "farlab/rng.hpp"

using namespace farlab;
using namespace farlab::envs;

namespace {

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

// Shortest cell path from the agent to the goal, doors treated as passable.
std::vector<std::pair<int, int>> plan(const MultiRoom& env) {
  const int n = env.config().grid_size;
  std::vector<int> parent(static_cast<std::size_t>(n * n), -1);
  std::queue<int> q;
  const int start = env.agent_y() * n + env.agent_x();
  parent[start] = start;
  q.push(start);
  while (!q.empty()) {
    const int c = q.front();
    q.pop();
    const int x = c % n, y = c / n;
    if (x == env.goal_x() && y == env.goal_y()) break;
    for (int d = 0; d < 4; ++d) {
      const int nx = x + kDx[d], ny = y + kDy[d];
      if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
      const int id = ny * n + nx;
      if (parent[id] >= 0 || env.cell(nx, ny).type == CellType::wall) continue;
      parent[id] = c;
      q.push(id);
    }
  }
  std::vector<std::pair<int, int>> path;
  for (int c = env.goal_y() * n + env.goal_x(); c != start; c = parent[c]) path.emplace_back(c % n, c / n);
  std::reverse(path.begin(), path.end());
  return path;
}

double oracle_heterogeneity(const Trajectory& tr) {
  double total = 0;
  for (std::size_t h = 0; h < tr.height(); ++h)
    for (std::size_t w = 0; w < tr.width(); ++w) {
      double m = 0;
      for (std::size_t t = 0; t < tr.length(); ++t) m += tr.at(t, h, w);
      m /= static_cast<double>(tr.length());
      double v = 0;
      for (std::size_t t = 0; t < tr.length(); ++t) v += (tr.at(t, h, w) - m) * (tr.at(t, h, w) - m);
      total += std::sqrt(v / static_cast<double>(tr.length()));
    }
  return total / static_cast<double>(tr.height() * tr.width());
}

}  // namespace

TEST(ToyGrid, TableIsSeedDeterministic) {
  ToyGridConfig cfg;
  EXPECT_EQ(ToyGrid(cfg, 3).table(), ToyGrid(cfg, 3).table());
  EXPECT_NE(ToyGrid(cfg, 3).table(), ToyGrid(cfg, 4).table());
  for (double v : ToyGrid(cfg, 3).table()) ASSERT_TRUE(v >= 0.0 && v < 1.0);
}

TEST(ToyGrid, ProbeIsTheStartObservation) {
  ToyGridConfig cfg;
  cfg.regime = EpisodeRegime::fixed;
  ToyGrid env(cfg, 1);
  Rng rng(1);
  const auto p = env.probe_start();
  ASSERT_EQ(p.size(), 32u);
  EXPECT_TRUE(std::equal(p.begin(), p.end(), env.current_obs().begin()));
  EXPECT_EQ(env.start_x(), 5);
  EXPECT_EQ(env.start_y(), 5);
  for (int t = 0; t < 1000; ++t) {
    const auto st = env.step(rng);
    if (st.episode_ended) {
      EXPECT_TRUE(std::equal(p.begin(), p.end(), st.obs.begin()));
    }
  }
  const auto again = env.probe_start();
  EXPECT_TRUE(std::equal(p.begin(), p.end(), again.begin()));
}

TEST(ToyGrid, NeverStepsOntoStart) {
  ToyGrid env(ToyGridConfig{}, 2);
  Rng rng(2);
  int adjacent = 0;
  for (int t = 0; t < 10000; ++t) {
    const bool next_to_start = std::abs(env.x() - 5) + std::abs(env.y() - 5) == 1;
    adjacent += next_to_start;
    env.step(rng);
    ASSERT_FALSE(env.x() == 5 && env.y() == 5);
  }
  EXPECT_GT(adjacent, 0);
}

TEST(ToyGrid, FixedEpisodesEndAt200) {
  ToyGridConfig cfg;
  cfg.regime = EpisodeRegime::fixed;
  ToyGrid env(cfg, 3);
  Rng rng(3);
  for (int s = 1; s <= 1000; ++s) EXPECT_EQ(env.step(rng).episode_ended, s % 200 == 0) << s;
}

TEST(ToyGrid, IncreasingEpisodeNEndsAt10N) {
  ToyGridConfig cfg;
  cfg.regime = EpisodeRegime::increasing;
  ToyGrid env(cfg, 4);
  Rng rng(4);
  std::vector<int> lengths;
  int t = 0;
  while (lengths.size() < 6) {
    ++t;
    if (env.step(rng).episode_ended) {
      lengths.push_back(t);
      t = 0;
    }
  }
  EXPECT_EQ(lengths, (std::vector<int>{10, 20, 30, 40, 50, 60}));
}

TEST(ToyGrid, RegimeNames) {
  for (auto r : {EpisodeRegime::reset_free, EpisodeRegime::fixed, EpisodeRegime::increasing})
    EXPECT_EQ(regime_from_string(to_string(r)), r);
  EXPECT_ANY_THROW(regime_from_string("weekly"));
}

TEST(MultiRoom, GoalRewardFormula) {
  EXPECT_DOUBLE_EQ(goal_reward(0, 120), 1.0);
  EXPECT_DOUBLE_EQ(goal_reward(120, 120), 1.0 - 0.9);
  EXPECT_DOUBLE_EQ(goal_reward(60, 120), 0.55);
}

TEST(MultiRoom, ResetIsSeedDeterministicAndSolvable) {
  MultiRoomConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    MultiRoom a(cfg), b(cfg);
    EXPECT_EQ(a.reset(seed), b.reset(seed));
    EXPECT_EQ(a.render(), b.render());
    EXPECT_TRUE(a.solvable());
    EXPECT_EQ(a.rooms().size(), 2u);
    const auto map = a.render();
    EXPECT_EQ(std::count(map.begin(), map.end(), 'G'), 1);
    for (const auto& r : a.rooms()) {
      EXPECT_GE(r.w, cfg.min_room);
      EXPECT_LE(r.w, cfg.max_room);
      EXPECT_GE(r.h, cfg.min_room);
      EXPECT_LE(r.h, cfg.max_room);
    }
  }
}

TEST(MultiRoom, ObservationUsesTheCodeBooks) {
  MultiRoom env(MultiRoomConfig{});
  const auto obs = env.reset(7);
  ASSERT_EQ(obs.size(), 147u);
  // The agent's own cell: view position (3, 6).
  EXPECT_EQ(obs[(3 * 7 + 6) * 3], static_cast<std::uint8_t>(CellType::empty));
  bool saw_wall = false;
  for (int c = 0; c < 49; ++c) {
    const auto type = obs[c * 3], color = obs[c * 3 + 1], state = obs[c * 3 + 2];
    ASSERT_LT(type, kNumCellTypes);
    ASSERT_LT(color, kNumColors);
    ASSERT_LT(state, kNumDoorStates);
    if (type == static_cast<std::uint8_t>(CellType::wall)) {
      saw_wall = true;
      EXPECT_EQ(color, static_cast<std::uint8_t>(Color::grey));
      EXPECT_EQ(state, 0);
    }
  }
  EXPECT_TRUE(saw_wall);
}

TEST(MultiRoom, OneHotHasOneEntryPerChannel) {
  MultiRoom env(MultiRoomConfig{});
  const auto enc = one_hot(env.reset(8));
  ASSERT_EQ(enc.size(), static_cast<std::size_t>(kOneHotDim));
  EXPECT_EQ(kOneHotDim, 686);
  double sum = 0;
  for (double v : enc) {
    ASSERT_TRUE(v == 0.0 || v == 1.0);
    sum += v;
  }
  EXPECT_EQ(sum, 49.0 * 3.0);
}

TEST(MultiRoom, InvalidActionThrows) {
  MultiRoom env(MultiRoomConfig{});
  env.reset(1);
  EXPECT_THROW(env.step(7), std::invalid_argument);
  EXPECT_THROW(env.step(-1), std::invalid_argument);
}

TEST(MultiRoom, TimeoutEndsWithZeroReward) {
  MultiRoom env(MultiRoomConfig{});
  env.reset(2);
  MultiRoomStep st;
  for (int t = 0; t < 120; ++t) {
    st = env.step(static_cast<int>(Action::left));
    if (t < 119) {
      ASSERT_FALSE(st.done);
    }
  }
  EXPECT_TRUE(st.done);
  EXPECT_EQ(st.reward, 0.0);
}

TEST(MultiRoom, ScriptedAgentReachesGoal) {
  int reached = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    MultiRoom env(MultiRoomConfig{});
    env.reset(seed);
    MultiRoomStep st;
    for (const auto& [nx, ny] : plan(env)) {
      const int dx = nx - env.agent_x(), dy = ny - env.agent_y();
      int want = 0;
      while (kDx[want] != dx || kDy[want] != dy) ++want;
      while (env.agent_dir() != want && !st.done) st = env.step(static_cast<int>(Action::right));
      if (env.cell(nx, ny).type == CellType::door && !env.cell(nx, ny).open)
        st = env.step(static_cast<int>(Action::toggle));
      const int t_before = env.t();
      if (st.done) break;
      st = env.step(static_cast<int>(Action::forward));
      if (nx == env.goal_x() && ny == env.goal_y()) {
        ASSERT_TRUE(st.done);
        EXPECT_DOUBLE_EQ(st.reward, goal_reward(t_before, 120));
        ++reached;
      }
    }
  }
  EXPECT_EQ(reached, 20);
}

TEST(Trajectory, IdenticalFramesHaveZeroHeterogeneity) {
  Trajectory tr(3, 4);
  const std::vector<double> f(12, 0.7);
  for (int i = 0; i < 5; ++i) tr.push(f);
  EXPECT_EQ(heterogeneity(tr), 0.0);
}

TEST(Trajectory, TwoFramesZeroThenTwo) {
  Trajectory tr(2, 2);
  tr.push(std::vector<double>(4, 0.0));
  tr.push(std::vector<double>(4, 2.0));
  EXPECT_DOUBLE_EQ(heterogeneity(tr), 1.0);
}

TEST(Trajectory, MatchesLoopOracleAndSerialKernel) {
  Rng rng(5);
  Trajectory tr(8, 8);
  std::vector<double> f(64);
  for (int t = 0; t < 20; ++t) {
    for (auto& v : f) v = rng.uniform(-3, 3);
    tr.push(f);
  }
  EXPECT_NEAR(heterogeneity(tr), oracle_heterogeneity(tr), 1e-12);
  EXPECT_NEAR(heterogeneity_serial(tr), heterogeneity_parallel(tr), 1e-12);
}

TEST(Trajectory, EmptyOrMisshapenThrows) {
  Trajectory tr(2, 2);
  EXPECT_ANY_THROW(heterogeneity(tr));
  EXPECT_ANY_THROW(tr.push(std::vector<double>(3, 0.0)));
}

TEST(Trajectory, CsvHasHeaderAndSidecar) {
  const auto dir = std::filesystem::temp_directory_path() / "farlab_traj_test";
  std::filesystem::create_directories(dir);
  Trajectory tr(1, 2);
  tr.push(std::vector<double>{1.0, 2.0});
  tr.write_csv(dir / "t.csv");
  std::ifstream in(dir / "t.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,p0,p1");
  EXPECT_TRUE(std::filesystem::exists(dir / "t.json"));
}
