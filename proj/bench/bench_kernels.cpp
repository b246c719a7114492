#include <benchmark/benchmark.h>

#include "glshrink/credible.hpp"
#include "glshrink/estimator.hpp"
#include "glshrink/posterior.hpp"
#include "glshrink/rng.hpp"
#include "glshrink/sampler.hpp"
#include "glshrink/weight_table.hpp"

using namespace glshrink;

namespace {

PriorSpec horseshoe(double tau) {
  GlobalLocal gl;
  gl.tau = tau;
  return gl;
}

Matrix noise(std::int64_t n, int k) {
  Stream stream = derive_stream(1, 0, "bench");
  Matrix x(n, k);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = (i % 50 == 0 ? 4.0 : 0.0) + stream.normal();
  }
  return x;
}

void BM_Kernel(benchmark::State& state) {
  const double s = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(PosteriorKernel(horseshoe(1e-3), 2, s).shrinkage_weight());
}
BENCHMARK(BM_Kernel)->Arg(0)->Arg(10)->Arg(100);

void BM_Sampler(benchmark::State& state) {
  const PosteriorKernel kern(horseshoe(1e-3), 1, 9.0);
  for (auto _ : state) benchmark::DoNotOptimize(KappaSampler(kern).segments());
}
BENCHMARK(BM_Sampler);

void BM_WeightTable(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_weight_table(horseshoe(1e-3), 2, 100.0, 1e-9).grid.size());
}
BENCHMARK(BM_WeightTable)->Unit(benchmark::kMillisecond);

void BM_BatchSerial(benchmark::State& state) {
  const Matrix x = noise(state.range(0), 2);
  const auto cov = Covariance::identity(2);
  const WeightTable table = build_weight_table(horseshoe(1e-3), 2, 200.0, 1e-9);
  for (auto _ : state) benchmark::DoNotOptimize(posterior_mean_batch_serial(x, cov, horseshoe(1e-3), &table));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchSerial)->Arg(1000)->Arg(100000);

void BM_BatchParallel(benchmark::State& state) {
  const Matrix x = noise(state.range(0), 2);
  const auto cov = Covariance::identity(2);
  const WeightTable table = build_weight_table(horseshoe(1e-3), 2, 200.0, 1e-9);
  for (auto _ : state) benchmark::DoNotOptimize(posterior_mean_batch(x, cov, horseshoe(1e-3), &table));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchParallel)->Arg(1000)->Arg(100000);

void BM_BatchDirect(benchmark::State& state) {
  const Matrix x = noise(state.range(0), 2);
  const auto cov = Covariance::identity(2);
  for (auto _ : state) benchmark::DoNotOptimize(posterior_mean_batch(x, cov, horseshoe(1e-3)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchDirect)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_CredibleRadius(benchmark::State& state) {
  Vector x(2);
  x << 1.5, -0.5;
  const auto cov = Covariance::identity(2);
  for (auto _ : state) benchmark::DoNotOptimize(credible_radius(0.05, x, cov, horseshoe(1e-3)));
}
BENCHMARK(BM_CredibleRadius)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
