#include <benchmark/benchmark.h>

#include <random>

#include "tameval/projection.hpp"

namespace {

using namespace tameval;

Eigen::MatrixXd random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_MarketPriceOfRisk(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Eigen::MatrixXd sigma = random_matrix(n, n, 1);
  const Eigen::VectorXd excess = random_matrix(n, 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(market_price_of_risk(sigma, excess));
}
BENCHMARK(BM_MarketPriceOfRisk)->Arg(1)->Arg(3)->Arg(6);

void BM_CachedProjectorApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Eigen::MatrixXd sigma = random_matrix(n, n + 1, 1);
  const Eigen::VectorXd excess = random_matrix(n, 1, 2);
  const RiskProjector projector(sigma);
  Eigen::VectorXd theta, p;
  for (auto _ : state) {
    projector.apply(excess, theta, p);
    benchmark::DoNotOptimize(theta.data());
  }
}
BENCHMARK(BM_CachedProjectorApply)->Arg(1)->Arg(3)->Arg(6);

}  // namespace
