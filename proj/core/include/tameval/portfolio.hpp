#pragma once

#include <cstddef>
#include <vector>

#include "tameval/deflator.hpp"
#include "tameval/path_array.hpp"
#include "tameval/scenario.hpp"

namespace tameval {

/// Amounts held in each stock and in the bond.
struct PortfolioProcess {
  PathArray stock;  // (paths, points, assets)
  PathArray cash;   // (paths, points), pi_0
  bool self_financing = true;

  static PortfolioProcess zeros(std::size_t paths, std::size_t points,
                                std::size_t assets);
  /// Holds a fixed number of shares of each stock: pi_i = shares_i * P_i.
  static PortfolioProcess buy_and_hold(const ScenarioSet& scenarios,
                                       const std::vector<double>& shares);
};

/// A payment of amount[path] at grid index step[path] (applied at the close
/// of that step).
struct LumpPayment {
  std::vector<std::size_t> step;
  std::vector<double> amount;
};

/// Cumulative income: an absolutely continuous rate plus lump payments.
/// Consumption is negative income.
struct IncomeStream {
  PathArray rate;  // (paths, points), frozen at the left end of each step
  std::vector<LumpPayment> lumps;

  static IncomeStream none(std::size_t paths, std::size_t points);
};

struct WealthPaths {
  PathArray wealth;  // (paths, points)
  double initial_capital = 0.0;
  // Filled by deflated_wealth_identity_residual.
  std::vector<double> identity_residual;
  double min_deflated = 0.0;
};

/// Left-endpoint accumulation of
///   gamma X(t) = x + int gamma dGamma + int gamma pi'(sigma dW + (b + delta - r 1) dt).
/// When the portfolio is flagged self-financing, its cash leg is set to
/// X - pi' 1.
WealthPaths wealth_paths(double x0, PortfolioProcess& portfolio,
                         const IncomeStream& income,
                         const ScenarioSet& scenarios);
WealthPaths wealth_paths(double x0, const PortfolioProcess& portfolio,
                         const IncomeStream& income,
                         const ScenarioSet& scenarios);

/// Per-path residual of
///   H X - int H dGamma - x - int H (sigma' pi - X theta)' dW,
/// with the stochastic integral taken against the deflator's own one-step
/// increments: dW -> rho (dW + theta dt) for the pi term and
/// -theta' dW -> rho - 1 for the X term, rho = Z(t_{k+1}) / Z(t_k). Under
/// this pairing the identity holds to round-off whenever p = 0; otherwise
/// the residual equals the drift sum rho H pi' p dt.
struct IdentityResidual {
  std::vector<double> residual;           // terminal, per path
  std::vector<double> max_abs_residual;   // over all points, per path
  std::vector<double> drift;              // sum rho H pi' p dt, per path
  std::vector<double> riemann_residual;   // same identity with plain dW sums
  std::vector<double> scale;              // 1 + magnitude of the terms
  double max_relative = 0.0;              // max |residual| / scale
  bool arbitrage_warning = false;         // some |p| > tolerance
};

IdentityResidual deflated_wealth_identity_residual(
    WealthPaths& wealth, const IncomeStream& income,
    const DeflatorSet& deflators, const PortfolioProcess& portfolio,
    const ScenarioSet& scenarios, double arbitrage_tol = 1e-8);

struct TamenessReport {
  double min = 0.0;
  std::size_t argmin_path = 0;
  std::size_t argmin_step = 0;
  bool violated = false;
};

/// Minimum over all paths and points; violated iff min < bound.
TamenessReport tameness_monitor(const PathArray& deflated_values, double bound);

/// Pointwise H_0 * values.
PathArray deflate(const PathArray& values, const DeflatorSet& deflators);

}  // namespace tameval
