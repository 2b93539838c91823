#include <benchmark/benchmark.h>

#include "spadapt/bcart.hpp"
#include "spadapt/gp.hpp"
#include "spadapt/partition.hpp"
#include "spadapt/spikeslab.hpp"

using namespace spadapt;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) {
  state.SetLabel(state.range(1) ? "omp" : "serial");
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_bcart(benchmark::State& state) {
  const Dataset d = simulate(doppler_function, ModelKind::white_noise, std::size_t(state.range(0)), 1.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_exact(d, GaltonWatsonPrior{4.0, SplitDecay::linear, -1}, exec_of(state)));
  label(state);
}

void BM_spikeslab(benchmark::State& state) {
  const Dataset d = simulate(doppler_function, ModelKind::white_noise, std::size_t(state.range(0)), 1.0, 1);
  const SpikeSlabPrior prior = SpikeSlabPrior::relaxed(double(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_spikeslab(d, prior, exec_of(state)));
  label(state);
}

void BM_partition(benchmark::State& state) {
  const Dataset d = simulate(doppler_function, ModelKind::regression, std::size_t(state.range(0)), 1.0, 1);
  const KnotGrid grid = order_statistic_grid(d.design);
  for (auto _ : state) benchmark::DoNotOptimize(fit_dp(d, grid, PartitionPrior{}, exec_of(state)));
  label(state);
}

void BM_gp(benchmark::State& state) {
  const Dataset d = simulate(doppler_function, ModelKind::regression, std::size_t(state.range(0)), 1.0, 1);
  const GpPriorSpec spec = GpPriorSpec::defaults(GpVariant::scale, d.n);
  for (auto _ : state) benchmark::DoNotOptimize(fit_conjugate(d, spec, exec_of(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_bcart)->ArgsProduct({{1 << 12, 1 << 16}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_spikeslab)->ArgsProduct({{1 << 12, 1 << 16}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_partition)->ArgsProduct({{1 << 11, 1 << 14}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gp)->ArgsProduct({{1 << 12, 1 << 16}, {0, 1}})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
