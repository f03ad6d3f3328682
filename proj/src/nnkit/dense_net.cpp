#include "farlab/nnkit/dense_net.hpp"

#include <cmath>
#include <stdexcept>

#include "farlab/nnkit/kernels.hpp"
#include "farlab/rng.hpp"

namespace farlab::nnkit {

std::string to_string(Activation act) { return act == Activation::relu ? "relu" : "identity"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

DenseNet DenseNet::zeros(std::span<const int> sizes, std::span<const Activation> activations) {
  if (sizes.size() < 2) throw std::invalid_argument("DenseNet needs at least two layer sizes");
  if (activations.size() != sizes.size() - 1)
    throw std::invalid_argument("DenseNet needs one activation per layer");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("DenseNet layer sizes must be positive");

  DenseNet net;
  std::size_t offset = 0;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    LayerShape shape;
    shape.in = sizes[k];
    shape.out = sizes[k + 1];
    shape.act = activations[k];
    shape.weight_offset = offset;
    offset += static_cast<std::size_t>(shape.in) * static_cast<std::size_t>(shape.out);
    shape.bias_offset = offset;
    offset += static_cast<std::size_t>(shape.out);
    net.layers_.push_back(shape);
  }
  net.params_.assign(offset, 0.0);
  return net;
}

DenseNet DenseNet::init(std::span<const int> sizes, std::span<const Activation> activations,
                        std::uint64_t seed) {
  DenseNet net = zeros(sizes, activations);
  Rng rng(seed);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const LayerShape& l = net.layers_[k];
    const double limit = l.act == Activation::relu ? std::sqrt(6.0 / l.in)
                                                    : std::sqrt(6.0 / (l.in + l.out));
    for (double& w : net.weight(k)) w = rng.uniform(-limit, limit);
  }
  return net;
}

DenseNet DenseNet::mlp(std::span<const int> sizes, std::uint64_t seed) {
  std::vector<Activation> acts(sizes.size() > 1 ? sizes.size() - 1 : 0, Activation::relu);
  if (!acts.empty()) acts.back() = Activation::identity;
  return init(sizes, acts, seed);
}

std::vector<int> DenseNet::sizes() const {
  std::vector<int> out;
  if (layers_.empty()) return out;
  out.push_back(layers_.front().in);
  for (const auto& l : layers_) out.push_back(l.out);
  return out;
}

std::span<double> DenseNet::weight(std::size_t k) {
  const auto& l = layers_.at(k);
  return std::span<double>(params_).subspan(l.weight_offset, static_cast<std::size_t>(l.in) * l.out);
}
std::span<const double> DenseNet::weight(std::size_t k) const {
  const auto& l = layers_.at(k);
  return std::span<const double>(params_).subspan(l.weight_offset,
                                                  static_cast<std::size_t>(l.in) * l.out);
}
std::span<double> DenseNet::bias(std::size_t k) {
  const auto& l = layers_.at(k);
  return std::span<double>(params_).subspan(l.bias_offset, l.out);
}
std::span<const double> DenseNet::bias(std::size_t k) const {
  const auto& l = layers_.at(k);
  return std::span<const double>(params_).subspan(l.bias_offset, l.out);
}

bool DenseNet::operator==(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].in != other.layers_[k].in || layers_[k].out != other.layers_[k].out ||
        layers_[k].act != other.layers_[k].act)
      return false;
  }
  return params_ == other.params_;
}

void forward_cached(const DenseNet& net, std::span<const double> x, ForwardCache& cache) {
  if (static_cast<int>(x.size()) != net.input_size())
    throw std::invalid_argument("forward: input has " + std::to_string(x.size()) +
                                " entries, network expects " + std::to_string(net.input_size()));
  cache.acts.resize(net.num_layers() + 1);
  cache.acts[0].assign(x.begin(), x.end());
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const LayerShape& l = net.layer(k);
    auto& y = cache.acts[k + 1];
    y.resize(l.out);
    kernels::affine(net.weight(k), net.bias(k), cache.acts[k], y);
    if (l.act == Activation::relu)
      for (double& v : y) v = v > 0.0 ? v : 0.0;
  }
}

std::vector<double> DenseNet::forward(std::span<const double> x) const {
  ForwardCache cache;
  forward_cached(*this, x, cache);
  return std::move(cache.acts.back());
}

void backward(const DenseNet& net, const ForwardCache& cache, std::span<const double> dout,
              std::span<double> grad) {
  if (static_cast<int>(dout.size()) != net.output_size())
    throw std::invalid_argument("backward: output gradient size mismatch");
  if (grad.size() != net.param_count())
    throw std::invalid_argument("backward: gradient buffer size mismatch");

  std::vector<double> delta(dout.begin(), dout.end());
  std::vector<double> prev;
  for (std::size_t k = net.num_layers(); k-- > 0;) {
    const LayerShape& l = net.layer(k);
    const auto& out = cache.acts[k + 1];
    const auto& in = cache.acts[k];
    if (l.act == Activation::relu)
      for (int i = 0; i < l.out; ++i)
        if (out[i] <= 0.0) delta[i] = 0.0;

    double* gw = grad.data() + l.weight_offset;
    double* gb = grad.data() + l.bias_offset;
    for (int i = 0; i < l.out; ++i) {
      const double d = delta[i];
      gb[i] += d;
      if (d == 0.0) continue;
      double* row = gw + static_cast<std::size_t>(i) * l.in;
      for (int j = 0; j < l.in; ++j) row[j] += d * in[j];
    }
    if (k == 0) break;

    const auto w = net.weight(k);
    prev.assign(l.in, 0.0);
    for (int i = 0; i < l.out; ++i) {
      const double d = delta[i];
      if (d == 0.0) continue;
      const double* row = w.data() + static_cast<std::size_t>(i) * l.in;
      for (int j = 0; j < l.in; ++j) prev[j] += d * row[j];
    }
    delta.swap(prev);
  }
}

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("mse: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

LossAndGrads mse_loss_and_grads(const DenseNet& net, std::span<const double> x,
                                std::span<const double> target) {
  if (static_cast<int>(target.size()) != net.output_size())
    throw std::invalid_argument("mse_loss_and_grads: target size mismatch");
  ForwardCache cache;
  forward_cached(net, x, cache);
  const auto y = cache.output();
  const double n = static_cast<double>(y.size());
  std::vector<double> dout(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dout[i] = 2.0 * (y[i] - target[i]) / n;
  LossAndGrads out;
  out.loss = mse(y, target);
  out.grads.assign(net.param_count(), 0.0);
  backward(net, cache, dout, out.grads);
  return out;
}

LossAndGrads mse_batch_loss_and_grads(const DenseNet& net, std::span<const std::vector<double>> xs,
                                      std::span<const std::vector<double>> targets) {
  return kernels::mse_batch(kernels::Exec::serial, net, xs, targets);
}

}  // namespace farlab::nnkit
