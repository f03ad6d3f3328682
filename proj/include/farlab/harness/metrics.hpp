#pragma once

#include <span>
#include <vector>

namespace farlab::harness {

/// (r_far - r_base) / r_base, sign-flipped when both returns are negative.
double relative_improvement(double r_far, double r_base);

/// Mean of the sorted scores after dropping floor(n/4) from each end.
double iqm(std::span<const double> scores);

/// Backward transfer of a T x T matrix perf[j][i] = performance on task i
/// after training through task j.
double bwt(const std::vector<std::vector<double>>& perf);

double mean(std::span<const double> xs);
/// Sample standard deviation divided by sqrt(n); 0 for n < 2.
double stderr_of_mean(std::span<const double> xs);
/// Least-squares slope of ys against xs.
double slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace farlab::harness
