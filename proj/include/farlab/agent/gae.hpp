#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace farlab::agent {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation over one environment's time series.
/// `values` carries one bootstrap entry past the horizon; done_t = 1 cuts
/// bootstrapping from step t + 1.
GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double gamma, double lambda);

}  // namespace farlab::agent
