#include <benchmark/benchmark.h>

#include "tameval/brownian.hpp"
#include "tameval/deflator.hpp"
#include "tameval/market_model.hpp"
#include "tameval/scenario.hpp"

namespace {

using namespace tameval;

void BM_BrownianBatch(benchmark::State& state) {
  const auto grid = build_time_grid(1.0, 50);
  const auto paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_brownian(grid, 1, paths, 7));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 50);
}
BENCHMARK(BM_BrownianBatch)->Arg(1 << 12)->Arg(1 << 15);

void BM_SimulateBlackScholes(benchmark::State& state) {
  auto model = ParametricMarket::black_scholes(100.0, 0.05, 0.09, 0.2);
  const auto grid = build_time_grid(1.0, 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(model, grid, static_cast<std::size_t>(state.range(0)), 7));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 50);
}
BENCHMARK(BM_SimulateBlackScholes)->Arg(1 << 12)->Arg(1 << 15);

void BM_DeflatorPaths(benchmark::State& state) {
  auto model = ParametricMarket::constant(
      Eigen::Vector3d(100, 50, 80), 0.03, Eigen::Vector3d(0.06, 0.05, 0.07),
      Eigen::Vector3d::Zero(),
      Eigen::MatrixXd{{0.2, 0.05, 0.0, 0.0}, {0.0, 0.3, 0.1, 0.0}, {0.1, 0.0, 0.0, 0.25}});
  const auto s = simulate(model, build_time_grid(1.0, 50), static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(deflator_paths(s));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 51);
}
BENCHMARK(BM_DeflatorPaths)->Arg(1 << 12);

void BM_BesselTerminalSample(benchmark::State& state) {
  auto model = std::make_shared<BesselDeflatorMarket>(100.0, 0.0, 0.2);
  const auto grid = build_time_grid(1.0, 1024);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_terminal(model, grid, 4096, 3));
  }
  state.SetItemsProcessed(state.iterations() * 4096 * 1024);
}
BENCHMARK(BM_BesselTerminalSample)->Unit(benchmark::kMillisecond);

}  // namespace
