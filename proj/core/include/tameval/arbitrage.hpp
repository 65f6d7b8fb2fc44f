#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tameval/deflator.hpp"
#include "tameval/path_array.hpp"
#include "tameval/portfolio.hpp"
#include "tameval/scenario.hpp"

namespace tameval {

inline constexpr double kDefaultArbitrageTolerance = 1e-8;

struct ArbitrageReport {
  bool is_state_arbitrage_free = true;
  double max_residual_norm = 0.0;
  std::size_t offending_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> offending;  // (path, point), first 100
  double tolerance = kDefaultArbitrageTolerance;
};

/// Scans |p| over every path and grid point; free iff all are <= tol.
ArbitrageReport detect_state_arbitrage(const ScenarioSet& scenarios,
                                       const DeflatorSet& deflators,
                                       double tol = kDefaultArbitrageTolerance);

/// pi = p / |p| wherever |p| > tol, zero elsewhere; the cash leg makes the
/// portfolio self-financing from zero initial capital.
PortfolioProcess construct_arbitrage_portfolio(
    const ScenarioSet& scenarios, const DeflatorSet& deflators,
    double tol = kDefaultArbitrageTolerance);

/// Gain process of a self-financed portfolio started from zero capital.
/// Shares its accumulation with wealth_paths, so the two agree exactly.
PathArray simulate_gain(const PortfolioProcess& portfolio,
                        const ScenarioSet& scenarios);

}  // namespace tameval
