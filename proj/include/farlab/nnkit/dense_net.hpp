#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace farlab::nnkit {

enum class Activation { relu, identity };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

struct LayerShape {
  int in = 0;
  int out = 0;
  Activation act = Activation::identity;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;
};

// Fully connected network with all parameters in one contiguous buffer so
// gradients and optimizer moments share a single flat layout.
class DenseNet {
 public:
  DenseNet() = default;

  /// He-uniform init for relu layers, Xavier-uniform for identity layers,
  /// zero biases. `activations` has one entry per layer (sizes.size() - 1).
  static DenseNet init(std::span<const int> sizes, std::span<const Activation> activations,
                       std::uint64_t seed);

  /// Hidden layers relu, output layer identity.
  static DenseNet mlp(std::span<const int> sizes, std::uint64_t seed);

  /// Zero-initialized network of the given shape.
  static DenseNet zeros(std::span<const int> sizes, std::span<const Activation> activations);

  std::size_t num_layers() const { return layers_.size(); }
  const LayerShape& layer(std::size_t k) const { return layers_[k]; }
  int input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_size() const { return layers_.empty() ? 0 : layers_.back().out; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<int> sizes() const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> weight(std::size_t k);
  std::span<const double> weight(std::size_t k) const;
  std::span<double> bias(std::size_t k);
  std::span<const double> bias(std::size_t k) const;

  std::vector<double> forward(std::span<const double> x) const;

  bool operator==(const DenseNet& other) const;

 private:
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

/// Per-layer post-activation outputs from one forward pass; acts[0] is the input.
struct ForwardCache {
  std::vector<std::vector<double>> acts;
  std::span<const double> output() const { return acts.back(); }
};

void forward_cached(const DenseNet& net, std::span<const double> x, ForwardCache& cache);

/// Backpropagates dL/d(output) through a cached forward pass and ADDS the
/// parameter gradient into `grad` (param-shaped).
void backward(const DenseNet& net, const ForwardCache& cache, std::span<const double> dout,
              std::span<double> grad);

struct LossAndGrads {
  double loss = 0.0;
  std::vector<double> grads;
};

/// loss = mean over output dims of (net(x) - target)^2, with exact gradient.
LossAndGrads mse_loss_and_grads(const DenseNet& net, std::span<const double> x,
                                std::span<const double> target);

/// Batch mean of the per-sample mse loss and gradient.
LossAndGrads mse_batch_loss_and_grads(const DenseNet& net,
                                      std::span<const std::vector<double>> xs,
                                      std::span<const std::vector<double>> targets);

double mse(std::span<const double> a, std::span<const double> b);

}  // namespace farlab::nnkit
