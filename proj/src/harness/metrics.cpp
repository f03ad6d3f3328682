#include "farlab/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace farlab::harness {

double relative_improvement(double r_far, double r_base) {
  if (r_base == 0.0) throw std::domain_error("relative improvement is undefined for a zero baseline");
  const double raw = (r_far - r_base) / r_base;
  return (r_far < 0.0 && r_base < 0.0) ? -raw : raw;
}

double iqm(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("iqm of an empty score list");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t drop = sorted.size() / 4;
  double s = 0.0;
  for (std::size_t i = drop; i < sorted.size() - drop; ++i) s += sorted[i];
  return s / static_cast<double>(sorted.size() - 2 * drop);
}

double bwt(const std::vector<std::vector<double>>& perf) {
  const std::size_t T = perf.size();
  if (T < 2) throw std::invalid_argument("bwt needs at least two tasks");
  for (const auto& row : perf)
    if (row.size() != T) throw std::invalid_argument("bwt needs a square performance matrix");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < T; ++i) s += perf[T - 1][i] - perf[i][i];
  return s / static_cast<double>(T - 1);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stderr_of_mean(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

double slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) return 0.0;
  const double mx = mean(xs), my = mean(ys);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace farlab::harness
