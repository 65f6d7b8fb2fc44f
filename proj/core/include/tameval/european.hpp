#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tameval/claims.hpp"
#include "tameval/deflator.hpp"
#include "tameval/path_array.hpp"
#include "tameval/portfolio.hpp"
#include "tameval/scenario.hpp"
#include "tameval/statistics.hpp"

namespace tameval {

struct ValuationReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_paths = 0;
  double second_moment = 0.0;  // sample mean of the squared deflated cash flow
  double min_deflated = 0.0;   // smallest per-path deflated cash flow
  std::vector<double> path_values;
  std::vector<std::string> warnings;
};

/// Per-path sum H c dt over [0, expiry) plus H g at expiry.
std::vector<double> deflated_cash_flows(const EuropeanClaim& claim,
                                        const ScenarioSet& scenarios,
                                        const DeflatorSet& deflators);

/// Mean of the deflated cash flows. A non-finite cash flow is an error that
/// names the path.
ValuationReport price_secc(const EuropeanClaim& claim,
                           const ScenarioSet& scenarios,
                           const DeflatorSet& deflators);

struct HedgeOptions {
  int degree = 4;
  double replication_tol = 1e-6;  // relative to 1 + |rhs|
  double rank_tol = kDefaultRankTolerance;
};

struct HedgeResult {
  std::vector<std::size_t> expiry;           // grid index per path
  std::vector<std::size_t> driver_support;   // 0-based
  PathArray wealth;       // X, (paths, points); g at expiry, 0 after
  PathArray value;        // H X plus cash flows paid so far, (paths, points)
  PathArray phi;          // (paths, points, drivers), 0 off support
  double initial_wealth = 0.0;
  std::vector<int> degree_used;  // per point, -1 where no path is alive
  std::vector<std::string> warnings;

  // Filled by replication_portfolio.
  PortfolioProcess portfolio;
  PathArray replication_residual;  // |sigma' pi - rhs| / (1 + |rhs|)
  double max_replication_residual = 0.0;
  double median_replication_residual = 0.0;
  std::size_t flagged_points = 0;
  bool replicable = true;

  // Filled by terminal_replication_error.
  std::vector<double> terminal_error;  // X(expiry) - g per path
  double terminal_rmse = 0.0;
  double terminal_max_error = 0.0;
};

/// X(t_k) = E[remaining deflated cash flow | state_k] / H(t_k) by
/// cross-sectional regression, and phi from regressing
/// (V_{k+1} - V_k) dW_i / dt on the state for supported drivers.
HedgeResult hedge_wealth_surface(const EuropeanClaim& claim,
                                 const ScenarioSet& scenarios,
                                 const DeflatorSet& deflators,
                                 const HedgeOptions& options = {});

/// Minimal-norm solve of sigma' pi = phi / H + X theta before expiry.
void replication_portfolio(HedgeResult& hedge, const DeflatorSet& deflators,
                           const ScenarioSet& scenarios,
                           const HedgeOptions& options = {});

/// Runs wealth from X(0) with the replication portfolio, paying the claim's
/// rate as consumption, and compares X(expiry) to g.
void terminal_replication_error(HedgeResult& hedge, const EuropeanClaim& claim,
                                const ScenarioSet& scenarios);

/// All three steps above.
HedgeResult hedge_claim(const EuropeanClaim& claim, const ScenarioSet& scenarios,
                        const DeflatorSet& deflators,
                        const HedgeOptions& options = {});

/// Per-path sum of (V_{k+1} - V_k) dW_{k,driver}; mean zero when the hedge
/// value carries no exposure to that driver.
MeanEstimate driver_covariation(const HedgeResult& hedge,
                                const ScenarioSet& scenarios,
                                std::size_t driver);

struct AttainabilityReport {
  bool rank_condition = true;        // rank(sigma_S) = k at every point
  bool complement_condition = true;  // range(sigma_C) = range(sigma_S)^perp
  bool attainable = true;
  std::size_t support_size = 0;
  std::size_t min_rank = 0;
  std::size_t max_rank = 0;
  double max_cross_alignment = 0.0;  // largest |U_S' U_C| entry
  bool rate_measurability_warning = false;
  std::vector<std::string> warnings;
};

AttainabilityReport attainability_check(
    const ScenarioSet& scenarios, const std::vector<std::size_t>& driver_support,
    double tol = 1e-8, double rank_tol = kDefaultRankTolerance);

}  // namespace tameval
