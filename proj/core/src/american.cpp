#include "tameval/american.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tameval/errors.hpp"
#include "tameval/parallel.hpp"
#include "tameval/regression.hpp"

namespace tameval {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_index(const StoppingRule& r) {
  if (r.index.empty()) return 0.0;
  double acc = 0.0;
  for (auto k : r.index) acc += static_cast<double>(k);
  return acc / static_cast<double>(r.index.size());
}

}  // namespace

DiscountedPayoffPaths discounted_payoff(const AmericanClaim& claim,
                                        const ScenarioSet& s,
                                        const DeflatorSet& defl) {
  if (defl.paths() != s.paths() || defl.points() != s.points()) {
    throw ValidationError("deflators do not match the scenarios");
  }
  claim.settlement.validate(s.assets());
  claim.rate.validate(s.assets());
  const std::size_t paths = s.paths();
  const std::size_t points = s.points();
  DiscountedPayoffPaths y;
  y.y = PathArray(paths, points);
  y.income = PathArray(paths, points);
  y.deflator = PathArray(paths, points);
  y.settlement = PathArray(paths, points);
  y.horizon = claim.horizon.indices(s);
  const bool has_rate = !claim.rate.is_zero();
  std::vector<double> lowest(paths, 0.0);
  std::vector<long long> bad(paths, -1);
  parallel_for(paths, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      double income = 0.0;
      double low = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < points; ++k) {
        const PathState st = s.state(p, k);
        const double h = defl.deflator(p, k);
        const double l = claim.settlement(st);
        y.income(p, k) = income;
        y.deflator(p, k) = h;
        y.settlement(p, k) = l;
        y.y(p, k) = income + h * l;
        if (!std::isfinite(y.y(p, k)) && bad[p] < 0) {
          bad[p] = static_cast<long long>(k);
        }
        if (k <= y.horizon[p]) low = std::min(low, y.y(p, k));
        if (has_rate && k + 1 < points) income += h * claim.rate(st) * s.grid.dt(k);
      }
      lowest[p] = low;
    }
  });
  for (std::size_t p = 0; p < paths; ++p) {
    if (bad[p] >= 0) {
      throw SimulationError("non-finite discounted payoff on path " +
                            std::to_string(p) + " at point " +
                            std::to_string(bad[p]));
    }
  }
  y.min_value = paths ? *std::min_element(lowest.begin(), lowest.end()) : 0.0;
  return y;
}

StoppingRule StoppingRule::fixed(std::size_t k, const DiscountedPayoffPaths& y) {
  StoppingRule r;
  r.index.resize(y.paths());
  for (std::size_t p = 0; p < y.paths(); ++p) r.index[p] = std::min(k, y.horizon[p]);
  r.label = "t" + std::to_string(k);
  return r;
}

MeanEstimate rule_value(const StoppingRule& rule, const DiscountedPayoffPaths& y) {
  if (rule.index.size() != y.paths()) {
    throw ValidationError("stopping rule does not match the path space");
  }
  std::vector<double> v(y.paths());
  for (std::size_t p = 0; p < y.paths(); ++p) v[p] = y.y(p, rule.index[p]);
  if (y.weights.empty()) {
    if (v.size() < 2) {
      MeanEstimate m;
      m.estimate = m.ci_low = m.ci_high = v.empty() ? 0.0 : v[0];
      m.count = v.size();
      return m;
    }
    return mean_estimate(v);
  }
  return weighted_mean_estimate(v, y.weights, y.exact);
}

PrefixEstimator::PrefixEstimator(std::size_t n_steps, std::vector<double> weights)
    : n_steps_(n_steps), weights_(std::move(weights)) {
  if (n_steps_ > 30) throw ValidationError("prefix estimator: too many steps");
  if (weights_.size() != (std::size_t{1} << n_steps_)) {
    throw ValidationError("prefix estimator: need 2^n weights");
  }
}

void PrefixEstimator::conditional_expectation(std::span<const double> target,
                                              std::span<const std::size_t> at,
                                              std::span<const char> need,
                                              std::span<double> out) const {
  const std::size_t paths = weights_.size();
  for (std::size_t s = 0; s <= n_steps_; ++s) {
    const std::size_t shift = n_steps_ - s;
    const std::size_t groups = std::size_t{1} << s;
    bool any = false;
    for (std::size_t p = 0; p < paths; ++p) {
      if (need[p] && at[p] == s) { any = true; break; }
    }
    if (!any) continue;
    sum_.assign(groups, 0.0);
    mass_.assign(groups, 0.0);
    for (std::size_t p = 0; p < paths; ++p) {
      if (!need[p] || at[p] != s) continue;
      sum_[p >> shift] += weights_[p] * target[p];
      mass_[p >> shift] += weights_[p];
    }
    for (std::size_t p = 0; p < paths; ++p) {
      if (!need[p] || at[p] != s) continue;
      out[p] = sum_[p >> shift] / mass_[p >> shift];
    }
  }
}

RegressionEstimator::RegressionEstimator(const ScenarioSet& scenarios,
                                         const DiscountedPayoffPaths& y,
                                         int degree, bool itm_only)
    : scenarios_(scenarios), y_(y), degree_(degree), itm_only_(itm_only) {
  if (scenarios.paths() != y.paths() || scenarios.points() != y.points()) {
    throw ValidationError("regression estimator: path spaces differ");
  }
}

void RegressionEstimator::conditional_expectation(std::span<const double> target,
                                                  std::span<const std::size_t> at,
                                                  std::span<const char> need,
                                                  std::span<double> out) const {
  const std::size_t paths = y_.paths();
  std::vector<std::vector<std::size_t>> by_point(y_.points());
  for (std::size_t p = 0; p < paths; ++p) {
    if (!need[p]) continue;
    if (itm_only_ && !(y_.settlement(p, at[p]) > 0.0)) {
      out[p] = kNaN;
      continue;
    }
    by_point[at[p]].push_back(p);
  }
  for (std::size_t s = 0; s < by_point.size(); ++s) {
    const auto& rows = by_point[s];
    if (rows.empty()) continue;
    const Eigen::MatrixXd features = state_features(scenarios_, s, rows);
    Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t p = rows[r];
      t[static_cast<Eigen::Index>(r)] =
          (target[p] - y_.income(p, s)) / y_.deflator(p, s);
    }
    const RegressionFit fit = fit_regression(features, t, degree_);
    if (!fit.warnings.empty()) {
      warnings_.push_back("point " + std::to_string(s) + ": " + fit.warnings.back());
    }
    const Eigen::VectorXd fitted = fit.predict(features);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t p = rows[r];
      out[p] = y_.income(p, s) +
               y_.deflator(p, s) * fitted[static_cast<Eigen::Index>(r)];
    }
  }
}

StoppingRule combine_stopping_times(const StoppingRule& tau1,
                                    const StoppingRule& tau2,
                                    const DiscountedPayoffPaths& y,
                                    const ConditionalEstimator& estimator) {
  const std::size_t paths = y.paths();
  if (tau1.index.size() != paths || tau2.index.size() != paths) {
    throw ValidationError("stopping rules do not match the path space");
  }
  std::vector<std::size_t> lo(paths);
  std::vector<double> target(paths);
  std::vector<char> need(paths);
  std::vector<double> est(paths, kNaN);
  StoppingRule out;
  out.index.resize(paths);
  out.label = "(" + tau1.label + "," + tau2.label + ")";
  bool any = false;
  for (std::size_t p = 0; p < paths; ++p) {
    const std::size_t a = tau1.index[p];
    const std::size_t b = tau2.index[p];
    lo[p] = std::min(a, b);
    const std::size_t hi = std::max(a, b);
    out.index[p] = hi;
    need[p] = lo[p] < hi;
    any = any || need[p];
    target[p] = y.y(p, hi);
  }
  if (!any) return out;
  estimator.conditional_expectation(target, lo, need, est);
  for (std::size_t p = 0; p < paths; ++p) {
    if (!need[p]) continue;
    // NaN compares false: no estimate means continue.
    if (est[p] < y.y(p, lo[p])) out.index[p] = lo[p];
  }
  return out;
}

std::vector<StoppingRule> fixed_date_candidates(const DiscountedPayoffPaths& y,
                                                const std::vector<std::size_t>& dates) {
  std::vector<StoppingRule> out;
  if (dates.empty()) {
    for (std::size_t k = 0; k < y.points(); ++k) out.push_back(StoppingRule::fixed(k, y));
  } else {
    for (auto k : dates) {
      if (k >= y.points()) throw ValidationError("candidate date outside the grid");
      out.push_back(StoppingRule::fixed(k, y));
    }
  }
  return out;
}

ImprovementTrace improve_to_value(std::vector<StoppingRule> candidates,
                                  const DiscountedPayoffPaths& y,
                                  const ConditionalEstimator& estimator,
                                  TournamentOrder order) {
  if (candidates.empty()) throw ValidationError("no candidate stopping rules");
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const StoppingRule& a, const StoppingRule& b) {
                     return order == TournamentOrder::kLatestFirst
                                ? mean_index(a) > mean_index(b)
                                : mean_index(a) < mean_index(b);
                   });
  ImprovementTrace trace;
  trace.rule = std::move(candidates.front());
  MeanEstimate current = rule_value(trace.rule, y);
  trace.values.push_back(current.estimate);
  trace.labels.push_back(trace.rule.label);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    StoppingRule next = combine_stopping_times(trace.rule, candidates[i], y, estimator);
    const MeanEstimate value = rule_value(next, y);
    const double slack =
        y.exact ? 1e-12 * (1.0 + std::abs(current.estimate))
                : 3.0 * std::max(value.std_error, current.std_error);
    if (value.estimate < current.estimate - slack) ++trace.decreases;
    next.label = candidates[i].label;
    trace.rule = std::move(next);
    current = value;
    trace.values.push_back(current.estimate);
    trace.labels.push_back(candidates[i].label);
  }
  trace.rule.label = "improved";
  trace.final = current;

  double bound = 0.0;
  for (std::size_t p = 0; p < y.paths(); ++p) {
    double m = y.y(p, 0);
    for (std::size_t k = 1; k <= y.horizon[p]; ++k) m = std::max(m, y.y(p, k));
    bound += y.weight(p) * m;
  }
  trace.running_max_bound = bound;
  trace.near_bound =
      std::abs(bound - current.estimate) <= 1e-3 * (1.0 + std::abs(bound));
  return trace;
}

AmericanResult price_sacc(const AmericanClaim& claim, const ScenarioSet& s,
                          const DeflatorSet& defl, const AmericanOptions& options) {
  const DiscountedPayoffPaths y = discounted_payoff(claim, s, defl);
  const RegressionEstimator estimator(s, y, options.degree, options.itm_only);
  AmericanResult out;
  out.trace = improve_to_value(fixed_date_candidates(y, claim.candidates), y,
                               estimator, claim.order);
  const MeanEstimate& f = out.trace.final;
  out.report.estimate = f.estimate;
  out.report.std_error = f.std_error;
  out.report.ci_low = f.ci_low;
  out.report.ci_high = f.ci_high;
  out.report.n_paths = y.paths();
  out.report.min_deflated = y.min_value;
  out.report.path_values.resize(y.paths());
  double sq = 0.0;
  for (std::size_t p = 0; p < y.paths(); ++p) {
    const double v = y.y(p, out.trace.rule.index[p]);
    out.report.path_values[p] = v;
    sq += v * v;
  }
  out.report.second_moment = y.paths() ? sq / static_cast<double>(y.paths()) : 0.0;
  out.report.warnings = estimator.warnings();
  if (out.trace.near_bound) {
    out.report.warnings.push_back(
        "value is close to the mean running maximum of Y; the supremum may be degenerate");
  }
  if (out.trace.decreases > 0) {
    out.report.warnings.push_back("improvement trace decreased " +
                                  std::to_string(out.trace.decreases) + " times");
  }

  const MeanEstimate eu = rule_value(StoppingRule::fixed(y.points() - 1, y), y);
  out.european_value = eu.estimate;
  out.european_std_error = eu.std_error;

  out.exercise_region.resize(y.points());
  for (std::size_t k = 0; k < y.points(); ++k) {
    out.exercise_region[k].point = k;
    out.exercise_region[k].min_price = std::numeric_limits<double>::infinity();
    out.exercise_region[k].max_price = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t p = 0; p < y.paths(); ++p) {
    const std::size_t k = out.trace.rule.index[p];
    if (k == y.horizon[p]) continue;  // forced at the horizon, not a choice
    auto& row = out.exercise_region[k];
    ++row.exercised;
    const double price = s.prices(p, k, 0);
    row.min_price = std::min(row.min_price, price);
    row.max_price = std::max(row.max_price, price);
  }
  for (auto& row : out.exercise_region) {
    if (row.exercised == 0) row.min_price = row.max_price = kNaN;
  }
  return out;
}

Envelope snell_envelope(const DiscountedPayoffPaths& y,
                        const ConditionalEstimator& estimator) {
  const std::size_t paths = y.paths();
  const std::size_t points = y.points();
  Envelope e;
  e.s = PathArray(paths, points);
  e.continuation = PathArray(paths, points, 1, kNaN);
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t k = y.horizon[p]; k < points; ++k) {
      e.s(p, k) = y.y(p, y.horizon[p]);
    }
  }
  std::vector<double> target(paths);
  std::vector<std::size_t> at(paths);
  std::vector<char> need(paths);
  std::vector<double> est(paths, kNaN);
  for (std::size_t kk = points - 1; kk-- > 0;) {
    bool any = false;
    for (std::size_t p = 0; p < paths; ++p) {
      need[p] = kk < y.horizon[p];
      any = any || need[p];
      at[p] = kk;
      target[p] = e.s(p, kk + 1);
      est[p] = kNaN;
    }
    if (!any) continue;
    estimator.conditional_expectation(target, at, need, est);
    for (std::size_t p = 0; p < paths; ++p) {
      if (!need[p]) continue;
      e.continuation(p, kk) = est[p];
      e.s(p, kk) = std::isnan(est[p]) ? y.y(p, kk) : std::max(y.y(p, kk), est[p]);
    }
  }
  double v = 0.0;
  for (std::size_t p = 0; p < paths; ++p) v += y.weight(p) * e.s(p, 0);
  e.value = v;
  return e;
}

FeasibilityReport exercise_feasibility_check(const DiscountedPayoffPaths& y,
                                             const Envelope& env, double capital) {
  FeasibilityReport r;
  r.capital = capital;
  r.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < y.paths(); ++p) {
    const double base = capital - env.s(p, 0);
    double compensator = 0.0;
    for (std::size_t k = 0; k <= y.horizon[p]; ++k) {
      const double slack =
          (base + (env.s(p, k) - y.y(p, k)) + compensator) / y.deflator(p, k);
      if (slack < r.min_slack) {
        r.min_slack = slack;
        r.argmin_path = p;
        r.argmin_point = k;
      }
      if (k < y.horizon[p] && !std::isnan(env.continuation(p, k))) {
        compensator += env.s(p, k) - env.continuation(p, k);
      }
    }
  }
  if (y.paths() == 0) r.min_slack = 0.0;
  r.violated = r.min_slack < 0.0;
  return r;
}

SupermartingaleCheck held_out_supermartingale_check(const ScenarioSet& s,
                                                    const DiscountedPayoffPaths& y,
                                                    int degree, double z_limit) {
  const std::size_t paths = y.paths();
  const std::size_t points = y.points();
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (std::size_t p = 0; p < paths; ++p) (p % 2 == 0 ? train : test).push_back(p);
  if (test.size() < 2) throw ValidationError("held-out check needs at least 4 paths");

  PathArray env(paths, points);
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t k = y.horizon[p]; k < points; ++k) env(p, k) = y.y(p, y.horizon[p]);
  }
  for (std::size_t kk = points - 1; kk-- > 0;) {
    std::vector<std::size_t> fit_rows;
    std::vector<std::size_t> all_rows;
    for (auto p : train) if (kk < y.horizon[p]) fit_rows.push_back(p);
    for (std::size_t p = 0; p < paths; ++p) if (kk < y.horizon[p]) all_rows.push_back(p);
    if (all_rows.empty()) continue;
    if (fit_rows.empty()) {
      for (auto p : all_rows) env(p, kk) = y.y(p, kk);
      continue;
    }
    Eigen::VectorXd t(static_cast<Eigen::Index>(fit_rows.size()));
    for (std::size_t r = 0; r < fit_rows.size(); ++r) {
      const std::size_t p = fit_rows[r];
      t[static_cast<Eigen::Index>(r)] =
          (env(p, kk + 1) - y.income(p, kk)) / y.deflator(p, kk);
    }
    const RegressionFit fit = fit_regression(state_features(s, kk, fit_rows), t, degree);
    const Eigen::VectorXd pred = fit.predict(state_features(s, kk, all_rows));
    for (std::size_t r = 0; r < all_rows.size(); ++r) {
      const std::size_t p = all_rows[r];
      const double c = y.income(p, kk) +
                       y.deflator(p, kk) * pred[static_cast<Eigen::Index>(r)];
      env(p, kk) = std::max(y.y(p, kk), c);
    }
  }

  SupermartingaleCheck out;
  std::vector<double> inc;
  for (std::size_t k = 0; k + 1 < points; ++k) {
    inc.clear();
    for (auto p : test) {
      if (k < y.horizon[p]) inc.push_back(env(p, k + 1) - env(p, k));
    }
    if (inc.size() < 2) continue;
    const MeanEstimate m = mean_estimate(inc);
    const double z = m.std_error > 0.0
                         ? m.estimate / m.std_error
                         : (m.estimate > 0.0 ? std::numeric_limits<double>::infinity()
                                             : 0.0);
    if (z > out.max_z) {
      out.max_z = z;
      out.worst_point = k;
    }
  }
  out.passed = !(out.max_z > z_limit);
  return out;
}

}  // namespace tameval
