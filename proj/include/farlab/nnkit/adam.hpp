#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace farlab::nnkit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

// Moments mirror the flat parameter buffer of the network they optimize.
struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  AdamState() = default;
  AdamState(std::size_t param_count, AdamConfig cfg)
      : config(cfg), m(param_count, 0.0), v(param_count, 0.0) {}

  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

}  // namespace farlab::nnkit
