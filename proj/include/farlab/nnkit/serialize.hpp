#pragma once

#include <nlohmann/json.hpp>

#include "farlab/nnkit/adam.hpp"
#include "farlab/nnkit/dense_net.hpp"

namespace farlab::nnkit {

inline constexpr int kNetFormatVersion = 1;

// {"version":1,"sizes":[...],"activations":[...],"weights":[[...]],"biases":[[...]]}
// Weights are flattened row-major per layer.
nlohmann::json net_to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& doc);

nlohmann::json adam_to_json(const AdamState& state);
AdamState adam_from_json(const nlohmann::json& doc);

}  // namespace farlab::nnkit
