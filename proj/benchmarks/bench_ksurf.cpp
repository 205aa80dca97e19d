#include <benchmark/benchmark.h>

#include <random>

#include "ksurf/birkhoff.hpp"
#include "ksurf/pipeline.hpp"

namespace {

ksurf::TwistedLoop random_loop(std::mt19937_64& rng, int n, int lo, int hi, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  ksurf::TwistedLoop a(n);
  for (int k = lo; k <= hi; ++k) {
    ksurf::Mat2 c = ksurf::Mat2::Zero();
    const bool even = k % 2 == 0;
    c(0, even ? 0 : 1) = {d(rng), d(rng)};
    c(1, even ? 1 : 0) = {d(rng), d(rng)};
    a[k] = c;
  }
  a[0] += ksurf::Mat2::Identity();
  return a;
}

void BM_Multiply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const auto a = random_loop(rng, n, -n, n, 0.3), b = random_loop(rng, n, -n, n, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(ksurf::multiply(a, b));
}
BENCHMARK(BM_Multiply)->Arg(8)->Arg(16)->Arg(32);

void BM_Split(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  const auto g = random_loop(rng, n, -4, 4, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(ksurf::split(g));
}
BENCHMARK(BM_Split)->Arg(8)->Arg(16)->Arg(32);

void BM_SolitonPipeline(benchmark::State& state) {
  ksurf::RunConfig cfg;
  cfg.x0 = cfg.y0 = 1.0;
  cfg.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ksurf::run_pipeline(cfg));
}
BENCHMARK(BM_SolitonPipeline)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
