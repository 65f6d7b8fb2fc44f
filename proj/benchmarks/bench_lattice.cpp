#include <benchmark/benchmark.h>

#include "tameval/lattice.hpp"

namespace {

using namespace tameval;

void BM_LatticePut(benchmark::State& state) {
  const auto lattice = Lattice::crr(100.0, 0.05, 0.2, 1.0, static_cast<std::size_t>(state.range(0)));
  AmericanClaim claim;
  claim.settlement = Payoff::put(100.0);
  for (auto _ : state) benchmark::DoNotOptimize(snell_lattice_oracle(lattice, claim));
}
BENCHMARK(BM_LatticePut)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_PathSpaceTournament(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto lattice = Lattice::crr(100.0, 0.05, 0.2, 1.0, n);
  const auto paths = lattice_paths(lattice, node_function(lattice, Payoff::put(100.0)));
  const PrefixEstimator estimator(n, paths.payoff.weights);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        improve_to_value(fixed_date_candidates(paths.payoff), paths.payoff, estimator));
  }
}
BENCHMARK(BM_PathSpaceTournament)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
