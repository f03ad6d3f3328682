#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "farlab/nnkit/dense_net.hpp"

// Data-parallel kernels. Each OpenMP kernel has a serial counterpart kept as
// the reference for tests and the benchmark. The parallel reductions split
// work into a fixed number of chunks that does not depend on the thread
// count, then combine chunk results in index order, so a given input always
// produces the same bits no matter how many threads run it.
namespace farlab::nnkit::kernels {

enum class Exec { serial, parallel };

/// Chunk count used by the parallel reductions.
inline constexpr std::size_t kReductionChunks = 8;

/// y = W x + b for a row-major out x in matrix. Skips zero inputs when x is
/// sparse (one-hot encodings).
void affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
            std::span<double> y);

/// Per-sample gradient callback: adds sample i's gradient into `grad` using
/// `cache` as scratch and returns its loss contribution.
using SampleGrad = std::function<double(std::size_t i, ForwardCache& cache, std::span<double> grad)>;

/// Sums per-sample losses and gradients over [0, n). `grad` is overwritten.
double accumulate_serial(std::size_t n, std::span<double> grad, const SampleGrad& fn);
double accumulate_parallel(std::size_t n, std::span<double> grad, const SampleGrad& fn);
double accumulate(Exec exec, std::size_t n, std::span<double> grad, const SampleGrad& fn);

/// Forward pass over a batch of inputs.
std::vector<std::vector<double>> forward_batch_serial(const DenseNet& net,
                                                      std::span<const std::vector<double>> xs);
std::vector<std::vector<double>> forward_batch_parallel(const DenseNet& net,
                                                        std::span<const std::vector<double>> xs);

/// Batch-mean mse gradient via the two accumulation paths.
LossAndGrads mse_batch(Exec exec, const DenseNet& net, std::span<const std::vector<double>> xs,
                       std::span<const std::vector<double>> targets);

}  // namespace farlab::nnkit::kernels
