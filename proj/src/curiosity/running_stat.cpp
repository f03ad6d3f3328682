#include "farlab/curiosity/running_stat.hpp"

#include <cmath>

namespace farlab::curiosity {

void RunningStat::push(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
  if (m2_ < 0.0) m2_ = 0.0;
  if (has_ema()) ema_ = n_ == 1 ? x : ema_coef_ * ema_ + (1.0 - ema_coef_) * x;
}

void RunningStat::merge(const RunningStat& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    const double coef = ema_coef_;
    const double ema = ema_;
    *this = other;
    ema_coef_ = coef;
    ema_ = has_ema() ? (other.has_ema() ? other.ema_ : other.mean_) : ema;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  n_ += other.n_;
}

double RunningStat::stddev() const { return std::sqrt(variance()); }

nlohmann::json RunningStat::to_json() const {
  return {{"n", n_}, {"mean", mean_}, {"m2", m2_}, {"ema_coef", ema_coef_}, {"ema", ema_}};
}

RunningStat RunningStat::from_json(const nlohmann::json& doc) {
  RunningStat s;
  s.n_ = doc.at("n").get<std::int64_t>();
  s.mean_ = doc.at("mean").get<double>();
  s.m2_ = doc.at("m2").get<double>();
  s.ema_coef_ = doc.at("ema_coef").get<double>();
  s.ema_ = doc.at("ema").get<double>();
  return s;
}

double normalize_intrinsic(RunningStat& stats, double r) {
  const double mean = stats.count() == 0 ? r : stats.mean();
  stats.push(r);
  return mean < 1e-12 ? r : r / mean;
}

}  // namespace farlab::curiosity
