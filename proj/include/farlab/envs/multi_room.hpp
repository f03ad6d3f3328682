#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "farlab/rng.hpp"

namespace farlab::envs {

// Code books of the egocentric observation channels.
enum class CellType : std::uint8_t { unseen = 0, empty = 1, wall = 2, door = 3, goal = 4 };
enum class Color : std::uint8_t { red = 0, green = 1, blue = 2, purple = 3, yellow = 4, grey = 5 };
enum class DoorState : std::uint8_t { open = 0, closed = 1, locked = 2 };

inline constexpr int kNumCellTypes = 5;
inline constexpr int kNumColors = 6;
inline constexpr int kNumDoorStates = 3;

enum class Action : int { left = 0, right = 1, forward = 2, pickup = 3, drop = 4, toggle = 5, done = 6 };
inline constexpr int kNumActions = 7;

struct MultiRoomConfig {
  int n_rooms = 2;
  int min_room = 4;  // room side including walls
  int max_room = 8;
  int grid_size = 25;
  int t_max = 120;
};

/// 7x7x3 egocentric view: index (vx * 7 + vy) * 3 + channel, agent at (3, 6)
/// facing towards vy = 0.
inline constexpr int kView = 7;
using MultiRoomObs = std::vector<std::uint8_t>;

/// Extrinsic reward for reaching the goal on step index t (0-based).
double goal_reward(int t, int t_max);

/// One-hot per channel code book: 7 * 7 * (5 + 6 + 3) values.
std::vector<double> one_hot(const MultiRoomObs& obs);
inline constexpr int kOneHotDim = kView * kView * (kNumCellTypes + kNumColors + kNumDoorStates);

struct MultiRoomStep {
  MultiRoomObs obs;
  double reward = 0.0;
  bool done = false;
};

struct Room {
  int x = 0, y = 0, w = 0, h = 0;  // top-left corner and size, walls included
};

// Chain of rooms joined by closed doors; the goal sits in the last room.
class MultiRoom {
 public:
  explicit MultiRoom(const MultiRoomConfig& cfg);

  MultiRoomObs reset(std::uint64_t seed);
  MultiRoomStep step(int action);

  MultiRoomObs observation() const;
  std::string render() const;
  /// BFS from the agent to the goal, treating doors as passable.
  bool solvable() const;

  struct Cell {
    CellType type = CellType::wall;
    Color color = Color::grey;
    bool open = false;
  };

  const Cell& cell(int x, int y) const { return grid_[static_cast<std::size_t>(y) * size_ + x]; }
  int agent_x() const { return ax_; }
  int agent_y() const { return ay_; }
  int agent_dir() const { return dir_; }
  int goal_x() const { return gx_; }
  int goal_y() const { return gy_; }
  int t() const { return t_; }
  const std::vector<Room>& rooms() const { return rooms_; }
  const MultiRoomConfig& config() const { return config_; }

 private:
  Cell& at(int x, int y) { return grid_[static_cast<std::size_t>(y) * size_ + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < size_ && y < size_; }
  bool try_generate(Rng& rng);

  MultiRoomConfig config_;
  int size_ = 0;
  std::vector<Cell> grid_;
  std::vector<Room> rooms_;
  int ax_ = 0, ay_ = 0, dir_ = 0;
  int gx_ = 0, gy_ = 0;
  int t_ = 0;
};

}  // namespace farlab::envs
