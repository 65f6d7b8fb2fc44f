#include "tameval/european.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <utility>

#include "tameval/errors.hpp"
#include "tameval/parallel.hpp"
#include "tameval/projection.hpp"
#include "tameval/regression.hpp"

namespace tameval {
namespace {

void check_inputs(const ScenarioSet& s, const DeflatorSet& defl) {
  if (defl.paths() != s.paths() || defl.points() != s.points()) {
    throw ValidationError("deflators do not match the scenarios");
  }
}

void validate_claim(const EuropeanClaim& claim, const ScenarioSet& s) {
  claim.payoff.validate(s.assets());
  claim.rate.validate(s.assets());
  for (auto i : claim.driver_support) {
    if (i >= s.drivers()) throw ValidationError("driver_support index out of range");
  }
}

// Deflated rate payments H c dt per point (zero at and after expiry) and the
// terminal lump H g.
struct CashFlows {
  std::vector<std::size_t> expiry;
  PathArray rate_flow;          // (paths, points)
  std::vector<double> payoff;   // g per path
  std::vector<double> lump;     // H g per path
};

CashFlows cash_flows(const EuropeanClaim& claim, const ScenarioSet& s,
                     const DeflatorSet& defl) {
  validate_claim(claim, s);
  check_inputs(s, defl);
  CashFlows cf;
  cf.expiry = claim.expiry.indices(s);
  cf.rate_flow = PathArray(s.paths(), s.points());
  cf.payoff.assign(s.paths(), 0.0);
  cf.lump.assign(s.paths(), 0.0);
  const bool has_rate = !claim.rate.is_zero();
  parallel_for(s.paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const std::size_t tau = cf.expiry[p];
      if (has_rate) {
        for (std::size_t k = 0; k < tau; ++k) {
          cf.rate_flow(p, k) =
              defl.deflator(p, k) * claim.rate(s.state(p, k)) * s.grid.dt(k);
        }
      }
      cf.payoff[p] = claim.payoff(s.state(p, tau));
      cf.lump[p] = defl.deflator(p, tau) * cf.payoff[p];
    }
  });
  return cf;
}

}  // namespace

std::vector<double> deflated_cash_flows(const EuropeanClaim& claim,
                                        const ScenarioSet& s,
                                        const DeflatorSet& defl) {
  const CashFlows cf = cash_flows(claim, s, defl);
  std::vector<double> v(s.paths());
  for (std::size_t p = 0; p < s.paths(); ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < cf.expiry[p]; ++k) acc += cf.rate_flow(p, k);
    v[p] = acc + cf.lump[p];
  }
  return v;
}

ValuationReport price_secc(const EuropeanClaim& claim, const ScenarioSet& s,
                           const DeflatorSet& defl) {
  ValuationReport r;
  r.path_values = deflated_cash_flows(claim, s, defl);
  for (std::size_t p = 0; p < r.path_values.size(); ++p) {
    if (!std::isfinite(r.path_values[p])) {
      throw SimulationError("non-finite cash flow for claim '" + claim.id +
                            "' on path " + std::to_string(p));
    }
  }
  r.n_paths = r.path_values.size();
  if (r.n_paths >= 2) {
    const auto m = mean_estimate(r.path_values);
    r.estimate = m.estimate;
    r.std_error = m.std_error;
    r.ci_low = m.ci_low;
    r.ci_high = m.ci_high;
  } else if (r.n_paths == 1) {
    r.estimate = r.ci_low = r.ci_high = r.path_values[0];
    r.warnings.push_back("single path: no standard error");
  }
  double sq = 0.0;
  r.min_deflated = r.n_paths ? r.path_values[0] : 0.0;
  for (double v : r.path_values) {
    sq += v * v;
    r.min_deflated = std::min(r.min_deflated, v);
  }
  r.second_moment = r.n_paths ? sq / static_cast<double>(r.n_paths) : 0.0;
  return r;
}

HedgeResult hedge_wealth_surface(const EuropeanClaim& claim,
                                 const ScenarioSet& s, const DeflatorSet& defl,
                                 const HedgeOptions& options) {
  const CashFlows cf = cash_flows(claim, s, defl);
  const std::size_t paths = s.paths();
  const std::size_t points = s.points();
  const std::size_t d = s.drivers();

  HedgeResult h;
  h.expiry = cf.expiry;
  h.driver_support = claim.driver_support;
  std::sort(h.driver_support.begin(), h.driver_support.end());
  h.driver_support.erase(
      std::unique(h.driver_support.begin(), h.driver_support.end()),
      h.driver_support.end());
  h.wealth = PathArray(paths, points);
  h.value = PathArray(paths, points);
  h.phi = PathArray(paths, points, d);
  h.degree_used.assign(points, -1);

  // remaining(p) holds the deflated cash flow from the current point on.
  std::vector<double> remaining(paths, 0.0);
  std::vector<std::size_t> alive;
  alive.reserve(paths);
  for (std::size_t kk = points; kk-- > 0;) {
    alive.clear();
    for (std::size_t p = 0; p < paths; ++p) {
      const std::size_t tau = cf.expiry[p];
      if (kk == tau) {
        remaining[p] = cf.lump[p];
        h.wealth(p, kk) = cf.payoff[p];
      } else if (kk < tau) {
        remaining[p] += cf.rate_flow(p, kk);
        alive.push_back(p);
      }
    }
    if (alive.empty()) continue;
    const Eigen::MatrixXd features = state_features(s, kk, alive);
    Eigen::VectorXd target(static_cast<Eigen::Index>(alive.size()));
    for (std::size_t r = 0; r < alive.size(); ++r) {
      target[static_cast<Eigen::Index>(r)] =
          remaining[alive[r]] / defl.deflator(alive[r], kk);
    }
    const RegressionFit fit =
        fit_regression(features, target, options.degree, options.rank_tol);
    h.degree_used[kk] = fit.degree();
    if (!fit.warnings.empty()) {
      h.warnings.push_back("point " + std::to_string(kk) + ": " +
                           fit.warnings.back());
    }
    const Eigen::VectorXd fitted = fit.predict(features);
    for (std::size_t r = 0; r < alive.size(); ++r) {
      h.wealth(alive[r], kk) = fitted[static_cast<Eigen::Index>(r)];
    }
  }

  for (std::size_t p = 0; p < paths; ++p) {
    const std::size_t tau = cf.expiry[p];
    double paid = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
      if (k <= tau) {
        h.value(p, k) = defl.deflator(p, k) * h.wealth(p, k) + paid;
        if (k < tau) paid += cf.rate_flow(p, k);
      } else {
        h.value(p, k) = h.value(p, tau);
      }
    }
  }
  h.initial_wealth = paths ? h.wealth(0, 0) : 0.0;

  for (std::size_t k = 0; k + 1 < points; ++k) {
    alive.clear();
    for (std::size_t p = 0; p < paths; ++p) {
      if (cf.expiry[p] > k) alive.push_back(p);
    }
    if (alive.empty() || h.driver_support.empty()) continue;
    const Eigen::MatrixXd features = state_features(s, k, alive);
    const double dt = s.grid.dt(k);
    for (std::size_t i : h.driver_support) {
      Eigen::VectorXd target(static_cast<Eigen::Index>(alive.size()));
      for (std::size_t r = 0; r < alive.size(); ++r) {
        const std::size_t p = alive[r];
        target[static_cast<Eigen::Index>(r)] =
            (h.value(p, k + 1) - h.value(p, k)) * s.dw(p, k)[i] / dt;
      }
      const RegressionFit fit =
          fit_regression(features, target, options.degree, options.rank_tol);
      const Eigen::VectorXd fitted = fit.predict(features);
      for (std::size_t r = 0; r < alive.size(); ++r) {
        h.phi(alive[r], k, i) = fitted[static_cast<Eigen::Index>(r)];
      }
    }
  }
  return h;
}

void replication_portfolio(HedgeResult& h, const DeflatorSet& defl,
                           const ScenarioSet& s, const HedgeOptions& options) {
  check_inputs(s, defl);
  const std::size_t paths = s.paths();
  const std::size_t points = s.points();
  const std::size_t n = s.assets();
  const std::size_t d = s.drivers();
  h.portfolio = PortfolioProcess::zeros(paths, points, n);
  h.portfolio.self_financing = false;
  h.replication_residual = PathArray(paths, points);

  parallel_for(paths, [&](std::size_t begin, std::size_t end) {
    Coefficients c;
    Eigen::MatrixXd sigma_t;
    Eigen::MatrixXd last;
    RiskProjector projector;
    bool have = false;
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(d));
    Eigen::VectorXd pi;
    Eigen::VectorXd res;
    for (std::size_t p = begin; p < end; ++p) {
      for (std::size_t k = 0; k < h.expiry[p] && k + 1 < points; ++k) {
        s.coefficients(p, k, c);
        sigma_t = c.volatility.transpose();
        if (!have || sigma_t.size() != last.size() ||
            std::memcmp(sigma_t.data(), last.data(),
                        sizeof(double) * static_cast<std::size_t>(sigma_t.size())) != 0) {
          projector = RiskProjector(sigma_t, options.rank_tol);
          last = sigma_t;
          have = true;
        }
        const double hk = defl.deflator(p, k);
        const double x = h.wealth(p, k);
        for (std::size_t j = 0; j < d; ++j) {
          rhs[static_cast<Eigen::Index>(j)] =
              h.phi(p, k, j) / hk + x * defl.theta(p, k, j);
        }
        projector.apply(rhs, pi, res);
        for (std::size_t i = 0; i < n; ++i) {
          h.portfolio.stock(p, k, i) = pi[static_cast<Eigen::Index>(i)];
        }
        h.replication_residual(p, k) = res.norm() / (1.0 + rhs.norm());
      }
    }
  });

  std::vector<double> active;
  h.flagged_points = 0;
  h.max_replication_residual = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t k = 0; k < h.expiry[p] && k + 1 < points; ++k) {
      const double r = h.replication_residual(p, k);
      active.push_back(r);
      h.max_replication_residual = std::max(h.max_replication_residual, r);
      if (r > options.replication_tol) ++h.flagged_points;
    }
  }
  h.median_replication_residual = active.empty() ? 0.0 : quantile(active, 0.5);
  h.replicable = h.flagged_points == 0;
  if (!h.replicable) {
    h.warnings.push_back(
        "replication residual above tolerance at " +
        std::to_string(h.flagged_points) + " points: claim not attainable");
  }
}

void terminal_replication_error(HedgeResult& h, const EuropeanClaim& claim,
                                const ScenarioSet& s) {
  const std::size_t paths = s.paths();
  const std::size_t points = s.points();
  if (h.portfolio.stock.paths() != paths) {
    throw ValidationError("terminal_replication_error: run replication_portfolio first");
  }
  IncomeStream income = IncomeStream::none(paths, points);
  if (!claim.rate.is_zero()) {
    for (std::size_t p = 0; p < paths; ++p) {
      for (std::size_t k = 0; k < h.expiry[p]; ++k) {
        income.rate(p, k) = -claim.rate(s.state(p, k));
      }
    }
  }
  const WealthPaths w =
      wealth_paths(h.initial_wealth, std::as_const(h.portfolio), income, s);
  h.terminal_error.assign(paths, 0.0);
  double sq = 0.0;
  h.terminal_max_error = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    const std::size_t tau = h.expiry[p];
    const double e = w.wealth(p, tau) - claim.payoff(s.state(p, tau));
    h.terminal_error[p] = e;
    sq += e * e;
    h.terminal_max_error = std::max(h.terminal_max_error, std::abs(e));
  }
  h.terminal_rmse = paths ? std::sqrt(sq / static_cast<double>(paths)) : 0.0;
}

HedgeResult hedge_claim(const EuropeanClaim& claim, const ScenarioSet& s,
                        const DeflatorSet& defl, const HedgeOptions& options) {
  HedgeResult h = hedge_wealth_surface(claim, s, defl, options);
  replication_portfolio(h, defl, s, options);
  terminal_replication_error(h, claim, s);
  return h;
}

MeanEstimate driver_covariation(const HedgeResult& h, const ScenarioSet& s,
                                std::size_t driver) {
  if (driver >= s.drivers()) throw ValidationError("driver index out of range");
  std::vector<double> v(s.paths(), 0.0);
  for (std::size_t p = 0; p < s.paths(); ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < s.points(); ++k) {
      acc += (h.value(p, k + 1) - h.value(p, k)) * s.dw(p, k)[driver];
    }
    v[p] = acc;
  }
  return mean_estimate(v);
}

AttainabilityReport attainability_check(const ScenarioSet& s,
                                        const std::vector<std::size_t>& support_in,
                                        double tol, double rank_tol) {
  std::vector<std::size_t> support = support_in;
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  if (support.empty()) throw ValidationError("driver_support must not be empty");
  const std::size_t d = s.drivers();
  const std::size_t n = s.assets();
  for (auto i : support) {
    if (i >= d) throw ValidationError("driver_support index out of range");
  }
  std::vector<std::size_t> complement;
  for (std::size_t j = 0; j < d; ++j) {
    if (!std::binary_search(support.begin(), support.end(), j)) complement.push_back(j);
  }

  AttainabilityReport r;
  r.support_size = support.size();
  r.min_rank = support.size();
  const auto ns = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd sig_s(ns, static_cast<Eigen::Index>(support.size()));
  Eigen::MatrixXd sig_c(ns, static_cast<Eigen::Index>(complement.size()));
  Eigen::MatrixXd last;
  bool have = false;
  Coefficients c;
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t k = 0; k + 1 < s.points(); ++k) {
      s.coefficients(p, k, c);
      if (have && std::memcmp(c.volatility.data(), last.data(),
                              sizeof(double) * static_cast<std::size_t>(last.size())) == 0) {
        continue;
      }
      last = c.volatility;
      have = true;
      for (std::size_t a = 0; a < support.size(); ++a) {
        sig_s.col(static_cast<Eigen::Index>(a)) =
            c.volatility.col(static_cast<Eigen::Index>(support[a]));
      }
      for (std::size_t a = 0; a < complement.size(); ++a) {
        sig_c.col(static_cast<Eigen::Index>(a)) =
            c.volatility.col(static_cast<Eigen::Index>(complement[a]));
      }
      const RiskProjector ps(sig_s, rank_tol);
      r.min_rank = std::min(r.min_rank, ps.rank());
      r.max_rank = std::max(r.max_rank, ps.rank());
      if (ps.rank() != support.size()) r.rank_condition = false;
      std::size_t rank_c = 0;
      if (!complement.empty() && sig_c.cwiseAbs().maxCoeff() > 0.0) {
        const RiskProjector pc(sig_c, rank_tol);
        rank_c = pc.rank();
        if (ps.rank() > 0 && rank_c > 0) {
          const double cross =
              (ps.range_basis().transpose() * pc.range_basis()).cwiseAbs().maxCoeff();
          r.max_cross_alignment = std::max(r.max_cross_alignment, cross);
          if (cross > tol) r.complement_condition = false;
        }
      }
      if (ps.rank() + rank_c != n) r.complement_condition = false;
    }
  }
  r.attainable = r.rank_condition && r.complement_condition;
  if (!r.rank_condition) {
    r.warnings.push_back("rank condition fails: rank(sigma_S) = " +
                         std::to_string(r.min_rank) + " < k = " +
                         std::to_string(support.size()));
  }
  if (!r.complement_condition) {
    r.warnings.push_back(
        "complement drivers do not span the orthogonal complement of the support range");
  }
  if (s.model && !s.model->deterministic_rate()) {
    r.rate_measurability_warning = true;
    r.warnings.push_back(
        "interest rate is not known to depend on supported drivers only");
  }
  return r;
}

}  // namespace tameval
