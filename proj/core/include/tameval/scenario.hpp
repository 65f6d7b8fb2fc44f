#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include "tameval/brownian.hpp"
#include "tameval/market_model.hpp"
#include "tameval/path_array.hpp"
#include "tameval/time_grid.hpp"

namespace tameval {

struct SimulationOptions {
  /// Cap on the per-path trapezoidal integral of |r| + |b| + |delta| + sum sigma^2.
  double integrability_cap = 1e8;
};

/// Observable state of one path at one grid point.
struct PathState {
  double t = 0.0;
  std::span<const double> prices;
  double aux = 0.0;
  double bond = 1.0;
};

/// Simulated bond, prices and discount factor on a grid.
struct ScenarioSet {
  TimeGrid grid;
  std::shared_ptr<const MarketModel> model;
  std::uint64_t seed = 0;
  PathArray increments;  // (paths, steps, drivers)
  PathArray prices;      // (paths, points, assets)
  PathArray aux;         // (paths, points)
  PathArray bond;        // (paths, points)
  PathArray discount;    // (paths, points), gamma = 1 / B

  std::size_t paths() const { return prices.paths(); }
  std::size_t points() const { return prices.points(); }
  std::size_t assets() const { return prices.width(); }
  std::size_t drivers() const { return increments.width(); }

  std::span<const double> dw(std::size_t path, std::size_t step) const {
    return increments.at(path, step);
  }
  PathState state(std::size_t path, std::size_t point) const {
    return {grid.time(point), prices.at(path, point), aux(path, point),
            bond(path, point)};
  }
  /// Re-evaluates the model coefficients at a stored point.
  void coefficients(std::size_t path, std::size_t point,
                    Coefficients& out) const;
};

/// Simulates one path given its Brownian increments. Output spans are
/// point-major: prices (points * assets), aux/bond/discount (points).
class PathSimulator {
 public:
  PathSimulator(const MarketModel& model, const TimeGrid& grid,
                SimulationOptions options = {});

  void run(std::size_t path_id, std::span<const double> increments,
           std::span<double> prices, std::span<double> aux,
           std::span<double> bond, std::span<double> discount,
           Coefficients& scratch) const;

 private:
  const MarketModel& model_;
  const TimeGrid& grid_;
  SimulationOptions options_;
};

ScenarioSet simulate_market(std::shared_ptr<const MarketModel> model,
                            BrownianBatch brownian,
                            const TimeGrid& grid,
                            SimulationOptions options = {});

/// simulate_brownian followed by simulate_market.
ScenarioSet simulate(std::shared_ptr<const MarketModel> model,
                     const TimeGrid& grid, std::size_t n_paths,
                     std::uint64_t seed, SimulationOptions options = {});

}  // namespace tameval
