#include "farlab/nnkit/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace farlab::nnkit::kernels {

void affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
            std::span<double> y) {
  const std::size_t in = x.size();
  const std::size_t out = y.size();

  std::size_t nnz = 0;
  for (double v : x) nnz += (v != 0.0);

  if (nnz * 4 < in) {
    std::vector<std::size_t> idx;
    idx.reserve(nnz);
    for (std::size_t j = 0; j < in; ++j)
      if (x[j] != 0.0) idx.push_back(j);
    for (std::size_t i = 0; i < out; ++i) {
      const double* row = w.data() + i * in;
      double s = b[i];
      for (std::size_t j : idx) s += row[j] * x[j];
      y[i] = s;
    }
    return;
  }

  for (std::size_t i = 0; i < out; ++i) {
    const double* row = w.data() + i * in;
    double s = 0.0;
    for (std::size_t j = 0; j < in; ++j) s += row[j] * x[j];
    y[i] = b[i] + s;
  }
}

double accumulate_serial(std::size_t n, std::span<double> grad, const SampleGrad& fn) {
  std::fill(grad.begin(), grad.end(), 0.0);
  ForwardCache cache;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) loss += fn(i, cache, grad);
  return loss;
}

double accumulate_parallel(std::size_t n, std::span<double> grad, const SampleGrad& fn) {
  const std::size_t chunks = std::min(n, kReductionChunks);
  if (chunks <= 1) return accumulate_serial(n, grad, fn);

  std::vector<std::vector<double>> partial(chunks, std::vector<double>(grad.size(), 0.0));
  std::vector<double> losses(chunks, 0.0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = n * static_cast<std::size_t>(c) / chunks;
    const std::size_t end = n * static_cast<std::size_t>(c + 1) / chunks;
    ForwardCache cache;
    double loss = 0.0;
    for (std::size_t i = begin; i < end; ++i) loss += fn(i, cache, partial[c]);
    losses[c] = loss;
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    loss += losses[c];
    for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += partial[c][p];
  }
  return loss;
}

double accumulate(Exec exec, std::size_t n, std::span<double> grad, const SampleGrad& fn) {
  return exec == Exec::parallel ? accumulate_parallel(n, grad, fn) : accumulate_serial(n, grad, fn);
}

std::vector<std::vector<double>> forward_batch_serial(const DenseNet& net,
                                                      std::span<const std::vector<double>> xs) {
  std::vector<std::vector<double>> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = net.forward(xs[i]);
  return out;
}

std::vector<std::vector<double>> forward_batch_parallel(const DenseNet& net,
                                                        std::span<const std::vector<double>> xs) {
  std::vector<std::vector<double>> out(xs.size());
  for (const auto& x : xs)
    if (static_cast<int>(x.size()) != net.input_size())
      throw std::invalid_argument("forward_batch: input size mismatch");
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(xs.size()); ++i)
    out[i] = net.forward(xs[i]);
  return out;
}

LossAndGrads mse_batch(Exec exec, const DenseNet& net, std::span<const std::vector<double>> xs,
                       std::span<const std::vector<double>> targets) {
  if (xs.empty()) throw std::invalid_argument("mse_batch: empty batch");
  if (xs.size() != targets.size()) throw std::invalid_argument("mse_batch: batch size mismatch");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (static_cast<int>(xs[i].size()) != net.input_size() ||
        static_cast<int>(targets[i].size()) != net.output_size())
      throw std::invalid_argument("mse_batch: sample shape mismatch");
  }

  const double batch = static_cast<double>(xs.size());
  const double dim = static_cast<double>(net.output_size());
  LossAndGrads out;
  out.grads.assign(net.param_count(), 0.0);
  out.loss = accumulate(exec, xs.size(), out.grads,
                        [&](std::size_t i, ForwardCache& cache, std::span<double> grad) {
                          forward_cached(net, xs[i], cache);
                          const auto y = cache.output();
                          std::vector<double> dout(y.size());
                          for (std::size_t k = 0; k < y.size(); ++k)
                            dout[k] = 2.0 * (y[k] - targets[i][k]) / (dim * batch);
                          backward(net, cache, dout, grad);
                          return mse(y, targets[i]) / batch;
                        });
  return out;
}

}  // namespace farlab::nnkit::kernels
