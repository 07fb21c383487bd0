// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/kernels.hpp"

using namespace gsp;

namespace {

ImagePlane noise_image(std::size_t side) {
  std::mt19937_64 rng(side);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImagePlane img(side, side);
  for (double& v : img.samples()) v = u(rng);
  return img;
}

const GridWeightParams kWeights{1.0, 0.1, 8, false};

template <bool Parallel>
void BM_spmv(benchmark::State& state) {
  const ImagePlane img = noise_image(static_cast<std::size_t>(state.range(0)));
  const SparseSymOperator l =
      variation_operator(build_grid_graph(img, kWeights), OperatorKind::Combinatorial);
  const std::vector<double> x(img.samples().begin(), img.samples().end());
  std::vector<double> y(x.size());
  for (auto _ : state) {
    if constexpr (Parallel) kernels::spmv(l, x, y);
    else kernels::serial::spmv(l, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(l.nonzeros()));
}

template <bool Parallel>
void BM_grid_weights(benchmark::State& state) {
  const ImagePlane img = noise_image(static_cast<std::size_t>(state.range(0)));
  std::vector<Edge> edges = build_grid_graph(img, kWeights).edges();
  for (auto _ : state) {
    if constexpr (Parallel) kernels::grid_edge_weights(img, kWeights, edges);
    else kernels::serial::grid_edge_weights(img, kWeights, edges);
    benchmark::DoNotOptimize(edges.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(edges.size()));
}

template <bool Parallel>
void BM_bilateral(benchmark::State& state) {
  const ImagePlane img = noise_image(static_cast<std::size_t>(state.range(0)));
  const GridWeightParams p{2.0, 0.1, 4, true};
  ImagePlane out;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::bilateral(img, p, 3, out);
    else kernels::serial::bilateral(img, p, 3, out);
    benchmark::DoNotOptimize(out.samples().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(img.pixel_count()));
}

template <bool Parallel>
void BM_dt_rows(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0));
  const ImagePlane img = noise_image(side);
  for (auto _ : state) {
    state.PauseTiming();
    ImagePlane work = img;
    state.ResumeTiming();
    const kernels::RowBatch batch{work.samples().data(), side, side, 1, side, 1};
    if constexpr (Parallel) kernels::dt_rows(batch, 1.0, 10.0, 5.0);
    else kernels::serial::dt_rows(batch, 1.0, 10.0, 5.0);
    benchmark::DoNotOptimize(work.samples().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(side * side));
}

}  // namespace

BENCHMARK(BM_spmv<false>)->Name("spmv/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_spmv<true>)->Name("spmv/omp")->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK(BM_grid_weights<false>)->Name("grid_weights/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_grid_weights<true>)->Name("grid_weights/omp")->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK(BM_bilateral<false>)->Name("bilateral/serial")->Arg(256)->Arg(512);
BENCHMARK(BM_bilateral<true>)->Name("bilateral/omp")->Arg(256)->Arg(512)->UseRealTime();
BENCHMARK(BM_dt_rows<false>)->Name("dt_rows/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_dt_rows<true>)->Name("dt_rows/omp")->Arg(256)->Arg(1024)->UseRealTime();

BENCHMARK_MAIN();
