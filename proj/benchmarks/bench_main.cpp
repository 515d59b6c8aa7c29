#include <benchmark/benchmark.h>

#include <vector>

#include "slelab/conformal_maps.hpp"
#include "slelab/driver_paths.hpp"
#include "slelab/loewner_ode.hpp"
#include "slelab/rough_path.hpp"
#include "slelab/trace_engine.hpp"

using namespace slelab;

namespace {

const BrownianSample& sample() {
  static const BrownianSample b = sample_brownian(42, std::size_t{1} << 16);
  return b;
}

void BM_ComposeChain(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto chain = MapChain::from_driver(sqrt_interpolate(scale_driver(sample(), 2.0), n));
  const HalfPlanePoint w(0.1, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(compose_chain(chain, w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ComposeChain)->RangeMultiplier(4)->Range(64, 16384);

void BM_BuildTrace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = sqrt_interpolate(scale_driver(sample(), 2.0), n);
  for (auto _ : state) benchmark::DoNotOptimize(build_trace(d));
}
BENCHMARK(BM_BuildTrace)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);

void BM_PVariation(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto b = sample_brownian(1, m);
  const std::vector<double> path(b.values().begin(), b.values().end());
  for (auto _ : state) benchmark::DoNotOptimize(p_variation(path, 2.5));
}
BENCHMARK(BM_PVariation)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

void BM_SolveRde(benchmark::State& state) {
  const auto x = Level2RoughPath::lift(sample(), 2.0);
  RdeOptions opt;
  opt.stride = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_rde_backward(x, HalfPlanePoint(0.0, 1.0), opt));
}
BENCHMARK(BM_SolveRde)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ForwardOde(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = PiecewiseDriver::from_path(sqrt_interpolate(scale_driver(sample(), 2.0), n));
  for (auto _ : state) benchmark::DoNotOptimize(forward_ode(d, HalfPlanePoint(0.3, 0.5), 1.0));
}
BENCHMARK(BM_ForwardOde)->RangeMultiplier(4)->Range(16, 1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
