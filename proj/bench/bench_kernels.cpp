// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <vector>

#include "farlab/envs/trajectory.hpp"
#include "farlab/nnkit/dense_net.hpp"
#include "farlab/nnkit/kernels.hpp"
#include "farlab/rng.hpp"

using namespace farlab;
namespace k = farlab::nnkit::kernels;

namespace {

struct Batch {
  nnkit::DenseNet net;
  std::vector<std::vector<double>> xs, ys;
};

Batch make_batch(int in, std::size_t n) {
  const std::vector<int> sizes{in, 64, 64, 64};
  Batch b{nnkit::DenseNet::mlp(sizes, 7), {}, {}};
  Rng rng(3);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(static_cast<std::size_t>(in)), y(64);
    for (auto& v : x) v = rng.uniform();
    for (auto& v : y) v = rng.uniform(-1, 1);
    b.xs.push_back(std::move(x));
    b.ys.push_back(std::move(y));
  }
  return b;
}

void BM_MseBatch(benchmark::State& st, k::Exec exec) {
  const auto b = make_batch(32, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(k::mse_batch(exec, b.net, b.xs, b.ys));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_Forward(benchmark::State& st, bool parallel) {
  const auto b = make_batch(686, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(parallel ? k::forward_batch_parallel(b.net, b.xs) : k::forward_batch_serial(b.net, b.xs));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_Heterogeneity(benchmark::State& st, bool parallel) {
  envs::Trajectory traj(64, 64);
  Rng rng(5);
  std::vector<double> frame(64 * 64);
  for (int t = 0; t < st.range(0); ++t) {
    for (auto& v : frame) v = rng.uniform();
    traj.push(frame);
  }
  for (auto _ : st)
    benchmark::DoNotOptimize(parallel ? envs::heterogeneity_parallel(traj) : envs::heterogeneity_serial(traj));
}

}  // namespace

BENCHMARK_CAPTURE(BM_MseBatch, serial, k::Exec::serial)->Arg(64)->Arg(512);
BENCHMARK_CAPTURE(BM_MseBatch, parallel, k::Exec::parallel)->Arg(64)->Arg(512);
BENCHMARK_CAPTURE(BM_Forward, serial, false)->Arg(8)->Arg(256);
BENCHMARK_CAPTURE(BM_Forward, parallel, true)->Arg(8)->Arg(256);
BENCHMARK_CAPTURE(BM_Heterogeneity, serial, false)->Arg(200);
BENCHMARK_CAPTURE(BM_Heterogeneity, parallel, true)->Arg(200);

BENCHMARK_MAIN();
