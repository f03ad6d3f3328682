#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace farlab::envs {

/// Time-ordered frames of identical shape (height x width; vector frames use
/// height 1).
class Trajectory {
 public:
  Trajectory(std::size_t height, std::size_t width);

  void push(std::span<const double> frame);

  std::size_t length() const { return height_ * width_ == 0 ? 0 : data_.size() / (height_ * width_); }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t frame_size() const { return height_ * width_; }
  std::span<const double> frame(std::size_t t) const;
  double at(std::size_t t, std::size_t h, std::size_t w) const {
    return data_[(t * height_ + h) * width_ + w];
  }
  const std::vector<double>& data() const { return data_; }

  /// CSV with header `t,p0,p1,...` plus a JSON sidecar holding the shape.
  void write_csv(const std::filesystem::path& csv_path) const;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> data_;
};

/// Mean over pixels of each pixel's population standard deviation over time.
double heterogeneity(const Trajectory& traj);
double heterogeneity_serial(const Trajectory& traj);
double heterogeneity_parallel(const Trajectory& traj);

}  // namespace farlab::envs
