#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tameval/claims.hpp"
#include "tameval/deflator.hpp"
#include "tameval/european.hpp"
#include "tameval/path_array.hpp"
#include "tameval/scenario.hpp"
#include "tameval/statistics.hpp"

namespace tameval {

/// Y(t_k) = sum_{j<k} H c dt + H(t_k) L(t_k) on a weighted path space.
struct DiscountedPayoffPaths {
  PathArray y;           // (paths, points)
  PathArray income;      // cumulative deflated income, (paths, points)
  PathArray deflator;    // H, (paths, points)
  PathArray settlement;  // L, (paths, points)
  std::vector<std::size_t> horizon;  // last admissible index per path
  std::vector<double> weights;       // empty means equal weights
  bool exact = false;                // weights enumerate the whole space
  double min_value = 0.0;            // over all paths and points up to horizon

  std::size_t paths() const { return y.paths(); }
  std::size_t points() const { return y.points(); }
  double weight(std::size_t p) const {
    return weights.empty() ? 1.0 / static_cast<double>(paths()) : weights[p];
  }
};

DiscountedPayoffPaths discounted_payoff(const AmericanClaim& claim,
                                        const ScenarioSet& scenarios,
                                        const DeflatorSet& deflators);

/// Exercise index per path.
struct StoppingRule {
  std::vector<std::size_t> index;
  std::string label;

  static StoppingRule fixed(std::size_t k, const DiscountedPayoffPaths& y);
  bool operator==(const StoppingRule& o) const { return index == o.index; }
};

MeanEstimate rule_value(const StoppingRule& rule, const DiscountedPayoffPaths& y);

/// Estimates E[target | F_s] for paths whose conditioning index is s.
/// Entries left NaN mean "no estimate; continue".
class ConditionalEstimator {
 public:
  virtual ~ConditionalEstimator() = default;
  virtual void conditional_expectation(std::span<const double> target,
                                       std::span<const std::size_t> at,
                                       std::span<const char> need,
                                       std::span<double> out) const = 0;
};

/// Exact conditional expectations on an enumerated binary path space whose
/// path index encodes the moves, most significant bit first.
class PrefixEstimator final : public ConditionalEstimator {
 public:
  PrefixEstimator(std::size_t n_steps, std::vector<double> weights);
  void conditional_expectation(std::span<const double> target,
                               std::span<const std::size_t> at,
                               std::span<const char> need,
                               std::span<double> out) const override;

 private:
  std::size_t n_steps_;
  std::vector<double> weights_;
  mutable std::vector<double> sum_;
  mutable std::vector<double> mass_;
};

/// Cross-sectional polynomial regression of (target - income_s) / H_s on
/// the state at s. With itm_only, paths whose settlement is not positive
/// are excluded from the fit and get no estimate.
class RegressionEstimator final : public ConditionalEstimator {
 public:
  RegressionEstimator(const ScenarioSet& scenarios,
                      const DiscountedPayoffPaths& y, int degree = 4,
                      bool itm_only = true);
  void conditional_expectation(std::span<const double> target,
                               std::span<const std::size_t> at,
                               std::span<const char> need,
                               std::span<double> out) const override;
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  const ScenarioSet& scenarios_;
  const DiscountedPayoffPaths& y_;
  int degree_;
  bool itm_only_;
  mutable std::vector<std::string> warnings_;
};

/// tau' = tau1 ^ tau2 where E[Y(tau1 v tau2) | F] < Y(tau1 ^ tau2) at the
/// earlier time, tau1 v tau2 otherwise (ties continue).
StoppingRule combine_stopping_times(const StoppingRule& tau1,
                                    const StoppingRule& tau2,
                                    const DiscountedPayoffPaths& y,
                                    const ConditionalEstimator& estimator);

struct ImprovementTrace {
  std::vector<double> values;  // E[Y(sigma_n)] after each combination
  std::vector<std::string> labels;
  StoppingRule rule;
  MeanEstimate final;
  double running_max_bound = 0.0;  // mean of per-path max_k Y
  bool near_bound = false;
  std::size_t decreases = 0;       // drops beyond the monitor's tolerance
};

/// Folds the candidates through combine_stopping_times. Candidates are
/// ordered by mean exercise index: descending for latest-first.
ImprovementTrace improve_to_value(std::vector<StoppingRule> candidates,
                                  const DiscountedPayoffPaths& y,
                                  const ConditionalEstimator& estimator,
                                  TournamentOrder order = TournamentOrder::kLatestFirst);

/// Every fixed date of the grid (capped at each path's horizon), or the
/// listed ones.
std::vector<StoppingRule> fixed_date_candidates(
    const DiscountedPayoffPaths& y, const std::vector<std::size_t>& dates = {});

struct AmericanOptions {
  int degree = 4;
  bool itm_only = true;
};

struct ExerciseRegionRow {
  std::size_t point = 0;
  std::size_t exercised = 0;
  double min_price = 0.0;  // of the first asset among paths exercising here
  double max_price = 0.0;
};

struct AmericanResult {
  ValuationReport report;
  ImprovementTrace trace;
  std::vector<ExerciseRegionRow> exercise_region;
  double european_value = 0.0;  // same settlement, paid at the horizon only
  double european_std_error = 0.0;
};

AmericanResult price_sacc(const AmericanClaim& claim, const ScenarioSet& scenarios,
                          const DeflatorSet& deflators,
                          const AmericanOptions& options = {});

/// Discrete envelope S_k = max(Y_k, E[S_{k+1} | F_k]), S = Y from the horizon on.
struct Envelope {
  PathArray s;             // (paths, points)
  PathArray continuation;  // E[S_{k+1} | F_k], NaN at and after the horizon
  double value = 0.0;      // weighted mean of S_0
};

Envelope snell_envelope(const DiscountedPayoffPaths& y,
                        const ConditionalEstimator& estimator);

struct FeasibilityReport {
  double min_slack = 0.0;  // min over paths and points of X - L
  std::size_t argmin_path = 0;
  std::size_t argmin_point = 0;
  bool violated = false;
  double capital = 0.0;
};

/// Super-hedge with capital u against the envelope's Doob decomposition:
///   H X - H L = (u - S_0) + (S_k - Y_k) + sum_{j<k} (S_j - E[S_{j+1} | F_j]).
FeasibilityReport exercise_feasibility_check(const DiscountedPayoffPaths& y,
                                             const Envelope& envelope,
                                             double capital);

struct SupermartingaleCheck {
  double max_z = -std::numeric_limits<double>::infinity();  // worst step
  std::size_t worst_point = 0;
  bool passed = true;
};

/// Fits the continuation regressions on the even paths and checks, on the
/// odd paths, that the mean envelope increment at each step is not
/// significantly positive (z <= z_limit).
SupermartingaleCheck held_out_supermartingale_check(const ScenarioSet& scenarios,
                                                    const DiscountedPayoffPaths& y,
                                                    int degree = 4,
                                                    double z_limit = 4.0);

}  // namespace tameval
