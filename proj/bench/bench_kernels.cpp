#include <random>

#include <benchmark/benchmark.h>

#include "fairgp/parallel_kernels.hpp"
#include "fairgp/reference.hpp"
#include "fairgp/sdr.hpp"

using namespace fairgp;

namespace {

Matrix inputs(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix X(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) X(i, j) = normal(rng);
  return X;
}

const KernelSpec kSpec = KernelSpec::rbf(2.0);

void BM_GramSerial(benchmark::State& state) {
  const Matrix X = inputs(state.range(0), 8, 1);
  for (auto _ : state) benchmark::DoNotOptimize(serial::gram(kSpec, X));
}

void BM_GramOmp(benchmark::State& state) {
  const Matrix X = inputs(state.range(0), 8, 1);
  for (auto _ : state) benchmark::DoNotOptimize(omp::gram(kSpec, X));
}

void BM_CrossGramSerial(benchmark::State& state) {
  const Matrix X = inputs(state.range(0), 8, 1), Z = inputs(state.range(0) / 2, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(serial::cross_gram(kSpec, Z, X));
}

void BM_CrossGramOmp(benchmark::State& state) {
  const Matrix X = inputs(state.range(0), 8, 1), Z = inputs(state.range(0) / 2, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(omp::cross_gram(kSpec, Z, X));
}

void BM_CenterSerial(benchmark::State& state) {
  const Matrix K = serial::gram(kSpec, inputs(state.range(0), 8, 1));
  for (auto _ : state) benchmark::DoNotOptimize(serial::center_columns(K));
}

void BM_CenterOmp(benchmark::State& state) {
  const Matrix K = serial::gram(kSpec, inputs(state.range(0), 8, 1));
  for (auto _ : state) benchmark::DoNotOptimize(omp::center_columns(K));
}

void BM_SdrIterative(benchmark::State& state) {
  const Matrix X = inputs(state.range(0), 8, 1);
  const Matrix K = omp::gram(kSpec, X);
  const Vector s = X.col(0);
  SdrOptions opt;
  opt.eta = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(sdr_subspace(K, s, 4, 10, opt));
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_GramSerial)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramOmp)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossGramSerial)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossGramOmp)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CenterSerial)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CenterOmp)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SdrIterative)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond)->Complexity();

BENCHMARK_MAIN();
