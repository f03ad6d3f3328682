#include "farlab/envs/multi_room.hpp"

#include <queue>
#include <stdexcept>

namespace farlab::envs {

namespace {

constexpr int kDirX[4] = {1, 0, -1, 0};  // right, down, left, up
constexpr int kDirY[4] = {0, 1, 0, -1};

bool overlaps(const Room& a, const Room& b) {
  return a.x <= b.x + b.w - 1 && b.x <= a.x + a.w - 1 && a.y <= b.y + b.h - 1 &&
         b.y <= a.y + a.h - 1;
}

bool see_behind(const MultiRoom::Cell& c) {
  if (c.type == CellType::wall) return false;
  if (c.type == CellType::door) return c.open;
  return true;
}

}  // namespace

double goal_reward(int t, int t_max) { return 1.0 - 0.9 * static_cast<double>(t) / t_max; }

std::vector<double> one_hot(const MultiRoomObs& obs) {
  constexpr int per_cell = kNumCellTypes + kNumColors + kNumDoorStates;
  if (obs.size() != static_cast<std::size_t>(kView * kView * 3))
    throw std::invalid_argument("one_hot: observation must be 7x7x3");
  std::vector<double> out(kOneHotDim, 0.0);
  for (int c = 0; c < kView * kView; ++c) {
    const auto type = obs[c * 3];
    const auto color = obs[c * 3 + 1];
    const auto state = obs[c * 3 + 2];
    if (type >= kNumCellTypes || color >= kNumColors || state >= kNumDoorStates)
      throw std::invalid_argument("one_hot: code outside its code book");
    double* cell = out.data() + c * per_cell;
    cell[type] = 1.0;
    cell[kNumCellTypes + color] = 1.0;
    cell[kNumCellTypes + kNumColors + state] = 1.0;
  }
  return out;
}

MultiRoom::MultiRoom(const MultiRoomConfig& cfg) : config_(cfg), size_(cfg.grid_size) {
  if (cfg.n_rooms < 1) throw std::invalid_argument("MultiRoom needs at least one room");
  if (cfg.min_room < 4 || cfg.max_room < cfg.min_room)
    throw std::invalid_argument("MultiRoom room sizes must satisfy 4 <= min <= max");
  if (cfg.grid_size < cfg.max_room) throw std::invalid_argument("MultiRoom grid too small");
  if (cfg.t_max <= 0) throw std::invalid_argument("MultiRoom t_max must be positive");
  grid_.assign(static_cast<std::size_t>(size_) * size_, Cell{});
}

bool MultiRoom::try_generate(Rng& rng) {
  rooms_.clear();
  std::vector<std::pair<int, int>> doors;
  std::vector<int> entry_side;  // side of each room that holds its entry door

  Room first;
  first.w = rng.between(config_.min_room, config_.max_room);
  first.h = rng.between(config_.min_room, config_.max_room);
  first.x = rng.between(0, size_ - first.w);
  first.y = rng.between(0, size_ - first.h);
  rooms_.push_back(first);
  entry_side.push_back(-1);

  for (int i = 1; i < config_.n_rooms; ++i) {
    const Room prev = rooms_.back();
    bool placed = false;
    for (int attempt = 0; attempt < 40 && !placed; ++attempt) {
      int side;
      do {
        side = static_cast<int>(rng.below(4));
      } while (side == entry_side.back());

      Room r;
      r.w = rng.between(config_.min_room, config_.max_room);
      r.h = rng.between(config_.min_room, config_.max_room);
      int dx, dy;
      if (side == 0 || side == 2) {
        dx = side == 0 ? prev.x + prev.w - 1 : prev.x;
        dy = rng.between(prev.y + 1, prev.y + prev.h - 2);
        r.x = side == 0 ? dx : dx - r.w + 1;
        r.y = rng.between(dy - r.h + 2, dy - 1);
      } else {
        dy = side == 1 ? prev.y + prev.h - 1 : prev.y;
        dx = rng.between(prev.x + 1, prev.x + prev.w - 2);
        r.y = side == 1 ? dy : dy - r.h + 1;
        r.x = rng.between(dx - r.w + 2, dx - 1);
      }
      if (r.x < 0 || r.y < 0 || r.x + r.w > size_ || r.y + r.h > size_) continue;
      bool clash = false;
      for (std::size_t j = 0; j + 1 < rooms_.size(); ++j)
        if (overlaps(r, rooms_[j])) clash = true;
      if (clash) continue;

      rooms_.push_back(r);
      doors.emplace_back(dx, dy);
      entry_side.push_back((side + 2) % 4);
      placed = true;
    }
    if (!placed) return false;
  }

  grid_.assign(static_cast<std::size_t>(size_) * size_, Cell{});
  for (const Room& r : rooms_)
    for (int y = r.y + 1; y < r.y + r.h - 1; ++y)
      for (int x = r.x + 1; x < r.x + r.w - 1; ++x) at(x, y) = Cell{CellType::empty, Color::red, false};

  int prev_color = -1;
  for (const auto& [dx, dy] : doors) {
    int color;
    do {
      color = static_cast<int>(rng.below(kNumColors));
    } while (color == prev_color);
    prev_color = color;
    at(dx, dy) = Cell{CellType::door, static_cast<Color>(color), false};
  }

  const Room& start = rooms_.front();
  ax_ = rng.between(start.x + 1, start.x + start.w - 2);
  ay_ = rng.between(start.y + 1, start.y + start.h - 2);
  dir_ = static_cast<int>(rng.below(4));

  const Room& last = rooms_.back();
  do {
    gx_ = rng.between(last.x + 1, last.x + last.w - 2);
    gy_ = rng.between(last.y + 1, last.y + last.h - 2);
  } while (gx_ == ax_ && gy_ == ay_);
  at(gx_, gy_) = Cell{CellType::goal, Color::green, false};
  return true;
}

MultiRoomObs MultiRoom::reset(std::uint64_t seed) {
  Rng rng(seed);
  while (!try_generate(rng)) {
  }
  if (!solvable()) throw std::logic_error("MultiRoom generated an unsolvable layout");
  t_ = 0;
  return observation();
}

bool MultiRoom::solvable() const {
  std::vector<char> seen(grid_.size(), 0);
  std::queue<std::pair<int, int>> q;
  q.emplace(ax_, ay_);
  seen[static_cast<std::size_t>(ay_) * size_ + ax_] = 1;
  while (!q.empty()) {
    const auto [x, y] = q.front();
    q.pop();
    if (x == gx_ && y == gy_) return true;
    for (int d = 0; d < 4; ++d) {
      const int nx = x + kDirX[d], ny = y + kDirY[d];
      if (!in_bounds(nx, ny)) continue;
      const std::size_t idx = static_cast<std::size_t>(ny) * size_ + nx;
      if (seen[idx] || cell(nx, ny).type == CellType::wall) continue;
      seen[idx] = 1;
      q.emplace(nx, ny);
    }
  }
  return false;
}

MultiRoomStep MultiRoom::step(int action) {
  if (action < 0 || action >= kNumActions)
    throw std::invalid_argument("MultiRoom action must be in [0, 7), got " + std::to_string(action));

  MultiRoomStep out;
  const int fx = ax_ + kDirX[dir_];
  const int fy = ay_ + kDirY[dir_];
  switch (static_cast<Action>(action)) {
    case Action::left: dir_ = (dir_ + 3) % 4; break;
    case Action::right: dir_ = (dir_ + 1) % 4; break;
    case Action::forward:
      if (in_bounds(fx, fy)) {
        const Cell& c = cell(fx, fy);
        const bool passable = c.type == CellType::empty || c.type == CellType::goal ||
                              (c.type == CellType::door && c.open);
        if (passable) {
          ax_ = fx;
          ay_ = fy;
          if (c.type == CellType::goal) {
            out.done = true;
            out.reward = goal_reward(t_, config_.t_max);
          }
        }
      }
      break;
    case Action::toggle:
      if (in_bounds(fx, fy) && cell(fx, fy).type == CellType::door) at(fx, fy).open = !cell(fx, fy).open;
      break;
    default: break;
  }
  ++t_;
  if (t_ >= config_.t_max) out.done = true;
  out.obs = observation();
  return out;
}

MultiRoomObs MultiRoom::observation() const {
  const int fx = kDirX[dir_], fy = kDirY[dir_];
  const int rx = -fy, ry = fx;

  std::array<Cell, kView * kView> view{};
  for (int vx = 0; vx < kView; ++vx)
    for (int vy = 0; vy < kView; ++vy) {
      const int ahead = kView - 1 - vy;
      const int side = vx - kView / 2;
      const int wx = ax_ + fx * ahead + rx * side;
      const int wy = ay_ + fy * ahead + ry * side;
      view[vx * kView + vy] = in_bounds(wx, wy) ? cell(wx, wy) : Cell{};
    }
  const int agent_vx = kView / 2, agent_vy = kView - 1;
  view[agent_vx * kView + agent_vy] = Cell{CellType::empty, Color::red, false};

  // Visibility propagates outward from the agent row by row and stops at
  // cells that block sight.
  std::array<bool, kView * kView> mask{};
  mask[agent_vx * kView + agent_vy] = true;
  for (int j = kView - 1; j >= 0; --j) {
    for (int i = 0; i < kView - 1; ++i) {
      if (!mask[i * kView + j] || !see_behind(view[i * kView + j])) continue;
      mask[(i + 1) * kView + j] = true;
      if (j > 0) {
        mask[(i + 1) * kView + j - 1] = true;
        mask[i * kView + j - 1] = true;
      }
    }
    for (int i = kView - 1; i > 0; --i) {
      if (!mask[i * kView + j] || !see_behind(view[i * kView + j])) continue;
      mask[(i - 1) * kView + j] = true;
      if (j > 0) {
        mask[(i - 1) * kView + j - 1] = true;
        mask[i * kView + j - 1] = true;
      }
    }
  }

  MultiRoomObs obs(kView * kView * 3, 0);
  for (int c = 0; c < kView * kView; ++c) {
    if (!mask[c]) continue;  // unseen encodes as (0, 0, 0)
    const Cell& cell = view[c];
    std::uint8_t* o = obs.data() + c * 3;
    switch (cell.type) {
      case CellType::empty: o[0] = static_cast<std::uint8_t>(CellType::empty); break;
      case CellType::wall:
        o[0] = static_cast<std::uint8_t>(CellType::wall);
        o[1] = static_cast<std::uint8_t>(Color::grey);
        break;
      case CellType::door:
        o[0] = static_cast<std::uint8_t>(CellType::door);
        o[1] = static_cast<std::uint8_t>(cell.color);
        o[2] = static_cast<std::uint8_t>(cell.open ? DoorState::open : DoorState::closed);
        break;
      case CellType::goal:
        o[0] = static_cast<std::uint8_t>(CellType::goal);
        o[1] = static_cast<std::uint8_t>(Color::green);
        break;
      default: break;
    }
  }
  return obs;
}

std::string MultiRoom::render() const {
  static constexpr char arrows[4] = {'>', 'v', '<', '^'};
  std::string s;
  s.reserve(static_cast<std::size_t>(size_) * (size_ + 1));
  for (int y = 0; y < size_; ++y) {
    for (int x = 0; x < size_; ++x) {
      if (x == ax_ && y == ay_) {
        s.push_back(arrows[dir_]);
        continue;
      }
      const Cell& c = cell(x, y);
      switch (c.type) {
        case CellType::empty: s.push_back('.'); break;
        case CellType::door: s.push_back(c.open ? '/' : '+'); break;
        case CellType::goal: s.push_back('G'); break;
        default: s.push_back('#'); break;
      }
    }
    s.push_back('\n');
  }
  return s;
}

}  // namespace farlab::envs
