#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

namespace farlab::curiosity {

/// Streaming count / mean / variance (Welford) with an optional exponential
/// moving average that is initialized from the first sample.
class RunningStat {
 public:
  RunningStat() = default;
  explicit RunningStat(double ema_coef) : ema_coef_(ema_coef) {}

  void push(double x);
  /// Chan et al. parallel merge; the EMA is not mergeable and keeps this side's value.
  void merge(const RunningStat& other);

  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Population variance.
  double variance() const { return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0; }
  double stddev() const;
  bool has_ema() const { return ema_coef_ > 0.0; }
  double ema_coef() const { return ema_coef_; }
  /// EMA if enabled, otherwise the arithmetic mean.
  double running_average() const { return has_ema() ? ema_ : mean_; }

  bool operator==(const RunningStat&) const = default;

  nlohmann::json to_json() const;
  static RunningStat from_json(const nlohmann::json& doc);

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double ema_coef_ = 0.0;
  double ema_ = 0.0;
};

/// Divides r by the running mean of the samples seen BEFORE it, then records
/// r. The first sample initializes the mean, so it normalizes to 1.
double normalize_intrinsic(RunningStat& stats, double r);

}  // namespace farlab::curiosity
