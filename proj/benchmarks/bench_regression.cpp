#include <benchmark/benchmark.h>

#include "tameval/american.hpp"
#include "tameval/deflator.hpp"
#include "tameval/european.hpp"
#include "tameval/market_model.hpp"
#include "tameval/regression.hpp"

namespace {

using namespace tameval;

ScenarioSet put_scenarios(std::size_t paths) {
  auto model = ParametricMarket::black_scholes(100.0, 0.05, 0.08, 0.2);
  return simulate(model, build_time_grid(1.0, 50), paths, 11);
}

void BM_FitRegression(benchmark::State& state) {
  const auto s = put_scenarios(static_cast<std::size_t>(state.range(0)));
  const Eigen::MatrixXd features = state_features(s, 25);
  Eigen::VectorXd y(features.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = std::max(100.0 - features(i, 0), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(fit_regression(features, y, 4));
}
BENCHMARK(BM_FitRegression)->Arg(1 << 12)->Arg(1 << 16);

void BM_AmericanPutTournament(benchmark::State& state) {
  const auto s = put_scenarios(static_cast<std::size_t>(state.range(0)));
  const auto d = deflator_paths(s);
  AmericanClaim claim;
  claim.settlement = Payoff::put(100.0);
  for (auto _ : state) benchmark::DoNotOptimize(price_sacc(claim, s, d));
}
BENCHMARK(BM_AmericanPutTournament)->Arg(1 << 13)->Unit(benchmark::kMillisecond);

void BM_HedgeCall(benchmark::State& state) {
  const auto s = put_scenarios(static_cast<std::size_t>(state.range(0)));
  const auto d = deflator_paths(s);
  EuropeanClaim claim;
  claim.payoff = Payoff::call(100.0);
  claim.driver_support = {0};
  for (auto _ : state) benchmark::DoNotOptimize(hedge_claim(claim, s, d));
}
BENCHMARK(BM_HedgeCall)->Arg(1 << 13)->Unit(benchmark::kMillisecond);

}  // namespace
