#include "farlab/envs/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace farlab::envs {

Trajectory::Trajectory(std::size_t height, std::size_t width) : height_(height), width_(width) {
  if (height == 0 || width == 0) throw std::invalid_argument("trajectory frame shape must be nonzero");
}

void Trajectory::push(std::span<const double> frame) {
  if (frame.size() != frame_size())
    throw std::invalid_argument("trajectory frame has " + std::to_string(frame.size()) +
                                " values, expected " + std::to_string(frame_size()));
  data_.insert(data_.end(), frame.begin(), frame.end());
}

std::span<const double> Trajectory::frame(std::size_t t) const {
  return std::span<const double>(data_).subspan(t * frame_size(), frame_size());
}

void Trajectory::write_csv(const std::filesystem::path& csv_path) const {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path.string());
  out << std::setprecision(17);
  out << "t";
  for (std::size_t p = 0; p < frame_size(); ++p) out << ",p" << p;
  out << "\n";
  for (std::size_t t = 0; t < length(); ++t) {
    out << t;
    for (double v : frame(t)) out << "," << v;
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + csv_path.string());

  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  std::ofstream meta(sidecar);
  if (!meta) throw std::runtime_error("cannot write " + sidecar.string());
  meta << nlohmann::json{{"frames", length()}, {"height", height_}, {"width", width_},
                         {"layout", "row-major, columns p0..p(H*W-1)"}}
              .dump(2)
       << "\n";
}

namespace {

double pixel_stddev(const Trajectory& traj, std::size_t p) {
  const std::size_t T = traj.length();
  const std::size_t stride = traj.frame_size();
  const auto& d = traj.data();
  double mean = 0.0;
  for (std::size_t t = 0; t < T; ++t) mean += d[t * stride + p];
  mean /= static_cast<double>(T);
  double ss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double x = d[t * stride + p] - mean;
    ss += x * x;
  }
  return std::sqrt(ss / static_cast<double>(T));
}

void require_frames(const Trajectory& traj) {
  if (traj.length() == 0) throw std::invalid_argument("heterogeneity of an empty trajectory");
}

}  // namespace

double heterogeneity_serial(const Trajectory& traj) {
  require_frames(traj);
  double sum = 0.0;
  for (std::size_t p = 0; p < traj.frame_size(); ++p) sum += pixel_stddev(traj, p);
  return sum / static_cast<double>(traj.frame_size());
}

double heterogeneity_parallel(const Trajectory& traj) {
  require_frames(traj);
  const std::size_t P = traj.frame_size();
  std::vector<double> sd(P);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(P); ++p) sd[p] = pixel_stddev(traj, p);
  double sum = 0.0;
  for (double s : sd) sum += s;
  return sum / static_cast<double>(P);
}

double heterogeneity(const Trajectory& traj) { return heterogeneity_parallel(traj); }

}  // namespace farlab::envs
