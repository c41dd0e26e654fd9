#include <benchmark/benchmark.h>

#include "optocool/adiabatic.hpp"
#include "optocool/dynamics.hpp"
#include "optocool/spectra.hpp"

using namespace optocool;

namespace {

const NormalizedParams kFig{10.0, 10.0, 0.1, 1e4, 100.0};

void BM_IntegrateVariances(benchmark::State& state) {
  const auto model = state.range(0) == 0 ? ThermalNoiseModel::MarkovFlat : ThermalNoiseModel::QuantumCoth;
  NormalizedParams p = kFig;
  p.b = p.phi = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_variances(p, model));
}
BENCHMARK(BM_IntegrateVariances)->ArgsProduct({{0, 1}, {1, 5, 10}})->Unit(benchmark::kMicrosecond);

void BM_LyapunovSteadyState(benchmark::State& state) {
  const auto sys = build_system(kFig);
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_steady_state(sys));
}
BENCHMARK(BM_LyapunovSteadyState)->Unit(benchmark::kMicrosecond);

void BM_EvolveCovariance(benchmark::State& state) {
  const auto sys = build_system(kFig);
  const double t_end = 20.0 / effective_rates(kFig).gamma_eff_ratio;
  EvolveOptions opts;
  opts.samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_covariance(sys, thermal_initial_state(kFig), t_end, opts));
  }
}
BENCHMARK(BM_EvolveCovariance)->Arg(201)->Arg(2001)->Unit(benchmark::kMillisecond);

void BM_ApproxVariance(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(approx_variance(kFig));
}
BENCHMARK(BM_ApproxVariance);

}  // namespace

BENCHMARK_MAIN();
