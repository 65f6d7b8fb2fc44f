#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "tameval/path_array.hpp"
#include "tameval/projection.hpp"
#include "tameval/scenario.hpp"
#include "tameval/statistics.hpp"

namespace tameval {

struct DeflatorOptions {
  double rank_tol = kDefaultRankTolerance;
};

/// Market price of risk, kernel residual and state-price density per path.
struct DeflatorSet {
  PathArray theta;          // (paths, points, drivers)
  PathArray residual;       // (paths, points, assets), p
  PathArray residual_norm;  // (paths, points), |p|
  PathArray log_density;    // (paths, points), ln Z_0
  PathArray density;        // (paths, points), Z_0
  PathArray deflator;       // (paths, points), H_0 = gamma * Z_0
  std::vector<double> theta_sq_integral;  // per path, trapezoid of |theta|^2
  std::size_t min_rank = 0;
  double rank_tol = kDefaultRankTolerance;

  std::size_t paths() const { return density.paths(); }
  std::size_t points() const { return density.points(); }

  /// Z_0(t_{k+1}) / Z_0(t_k), the deflator's own one-step multiplier.
  double step_ratio(std::size_t path, std::size_t step) const;
};

/// Builds theta, p, Z_0 and H_0 for every path:
///   ln Z_0(t_{k+1}) = ln Z_0(t_k) - theta_k' dW_k - |theta_k|^2 dt_k / 2.
DeflatorSet deflator_paths(const ScenarioSet& scenarios,
                           DeflatorOptions options = {});

struct IntegrabilityReport {
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
  double cap = std::numeric_limits<double>::infinity();
  bool all_finite = true;
  std::vector<std::size_t> flagged_paths;  // integral > cap, first 100
  std::size_t flagged_count = 0;
};

IntegrabilityReport integrability_diagnostic(
    const DeflatorSet& deflators,
    double cap = std::numeric_limits<double>::infinity());

/// Sample mean of Z_0(T) with its standard error. Requires at least 2 paths.
MeanEstimate estimate_ez0(const DeflatorSet& deflators);
MeanEstimate estimate_ez0(std::span<const double> terminal_density);

/// Terminal values of a simulation that is never stored in full; used for
/// runs too large to materialize (many paths on fine grids).
struct TerminalSample {
  std::vector<double> density;            // Z_0(T)
  std::vector<double> deflator;           // H_0(T)
  std::vector<double> theta_sq_integral;  // per path
  PathArray prices;                       // (paths, 1, assets)
  std::vector<double> aux;                // aux(T)
};

TerminalSample sample_terminal(std::shared_ptr<const MarketModel> model,
                               const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed,
                               SimulationOptions sim_options = {},
                               DeflatorOptions options = {});

}  // namespace tameval
