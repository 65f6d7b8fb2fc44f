#include "tameval/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "tameval/errors.hpp"
#include "tameval/parallel.hpp"

namespace tameval {
namespace {

void check_shapes(const PortfolioProcess& pf, const IncomeStream& income,
                  const ScenarioSet& s) {
  if (pf.stock.paths() != s.paths() || pf.stock.points() != s.points() ||
      pf.stock.width() != s.assets()) {
    throw ValidationError("portfolio dimensions do not match the scenarios");
  }
  if (income.rate.paths() != s.paths() || income.rate.points() != s.points()) {
    throw ValidationError("income stream dimensions do not match the scenarios");
  }
  for (const auto& lump : income.lumps) {
    if (lump.step.size() != s.paths() || lump.amount.size() != s.paths()) {
      throw ValidationError("lump payment must have one entry per path");
    }
    for (auto k : lump.step) {
      if (k >= s.points()) throw ValidationError("lump index outside the grid");
    }
  }
}

// Lump income landing on each point of one path.
void lumps_for_path(const IncomeStream& income, std::size_t path,
                    std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& lump : income.lumps) {
    out[lump.step[path]] += lump.amount[path];
  }
}

}  // namespace

PortfolioProcess PortfolioProcess::zeros(std::size_t paths, std::size_t points,
                                         std::size_t assets) {
  return {PathArray(paths, points, assets), PathArray(paths, points), true};
}

PortfolioProcess PortfolioProcess::buy_and_hold(
    const ScenarioSet& s, const std::vector<double>& shares) {
  if (shares.size() != s.assets()) {
    throw ValidationError("buy_and_hold: one share count per asset required");
  }
  auto pf = zeros(s.paths(), s.points(), s.assets());
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t k = 0; k < s.points(); ++k) {
      for (std::size_t i = 0; i < s.assets(); ++i) {
        pf.stock(p, k, i) = shares[i] * s.prices(p, k, i);
      }
    }
  }
  return pf;
}

IncomeStream IncomeStream::none(std::size_t paths, std::size_t points) {
  return {PathArray(paths, points), {}};
}

WealthPaths wealth_paths(double x0, const PortfolioProcess& pf,
                         const IncomeStream& income, const ScenarioSet& s) {
  check_shapes(pf, income, s);
  const std::size_t n = s.assets();
  const std::size_t d = s.drivers();
  const std::size_t points = s.points();
  WealthPaths out;
  out.initial_capital = x0;
  out.wealth = PathArray(s.paths(), points);

  parallel_for(s.paths(), [&](std::size_t begin, std::size_t end) {
    Coefficients c;
    Eigen::VectorXd excess;
    std::vector<double> lumps(points);
    for (std::size_t p = begin; p < end; ++p) {
      lumps_for_path(income, p, lumps);
      double gx = x0 + lumps[0];
      out.wealth(p, 0) = gx;
      for (std::size_t k = 0; k + 1 < points; ++k) {
        s.coefficients(p, k, c);
        c.excess_return(excess);
        const double dt = s.grid.dt(k);
        const auto dw = s.dw(p, k);
        const double g = s.discount(p, k);
        double trade = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          double move = excess[ii] * dt;
          for (std::size_t j = 0; j < d; ++j) {
            move += c.volatility(ii, static_cast<Eigen::Index>(j)) * dw[j];
          }
          trade += pf.stock(p, k, i) * move;
        }
        gx += g * income.rate(p, k) * dt + g * trade +
              s.discount(p, k + 1) * lumps[k + 1];
        out.wealth(p, k + 1) = gx / s.discount(p, k + 1);
      }
    }
  });
  return out;
}

WealthPaths wealth_paths(double x0, PortfolioProcess& pf,
                         const IncomeStream& income, const ScenarioSet& s) {
  WealthPaths out = wealth_paths(x0, std::as_const(pf), income, s);
  if (pf.self_financing) {
    for (std::size_t p = 0; p < s.paths(); ++p) {
      for (std::size_t k = 0; k < s.points(); ++k) {
        double invested = 0.0;
        for (std::size_t i = 0; i < s.assets(); ++i) invested += pf.stock(p, k, i);
        pf.cash(p, k) = out.wealth(p, k) - invested;
      }
    }
  }
  return out;
}

IdentityResidual deflated_wealth_identity_residual(
    WealthPaths& wealth, const IncomeStream& income, const DeflatorSet& defl,
    const PortfolioProcess& pf, const ScenarioSet& s, double arbitrage_tol) {
  check_shapes(pf, income, s);
  if (defl.paths() != s.paths() || defl.points() != s.points() ||
      wealth.wealth.paths() != s.paths()) {
    throw ValidationError("identity residual: inconsistent inputs");
  }
  const std::size_t paths = s.paths();
  const std::size_t points = s.points();
  const std::size_t n = s.assets();
  const std::size_t d = s.drivers();
  const double x0 = wealth.initial_capital;

  IdentityResidual r;
  r.residual.assign(paths, 0.0);
  r.max_abs_residual.assign(paths, 0.0);
  r.drift.assign(paths, 0.0);
  r.riemann_residual.assign(paths, 0.0);
  r.scale.assign(paths, 0.0);
  wealth.identity_residual.assign(paths, 0.0);
  std::vector<double> min_deflated(paths, 0.0);
  std::vector<char> warned(paths, 0);

  parallel_for(paths, [&](std::size_t begin, std::size_t end) {
    Coefficients c;
    std::vector<double> lumps(points);
    Eigen::VectorXd sigma_pi(static_cast<Eigen::Index>(d));
    for (std::size_t p = begin; p < end; ++p) {
      lumps_for_path(income, p, lumps);
      const auto& X = wealth.wealth;
      double income_h = defl.deflator(p, 0) * lumps[0];
      double integral = 0.0;
      double riemann = 0.0;
      double drift = 0.0;
      double magnitude = std::abs(x0);
      double worst = std::abs(defl.deflator(p, 0) * X(p, 0) - income_h - x0);
      double lowest = defl.deflator(p, 0) * X(p, 0);
      for (std::size_t k = 0; k + 1 < points; ++k) {
        s.coefficients(p, k, c);
        const double h = defl.deflator(p, k);
        const double rho = defl.step_ratio(p, k);
        const double dt = s.grid.dt(k);
        const auto dw = s.dw(p, k);
        if (defl.residual_norm(p, k) > arbitrage_tol) warned[p] = 1;

        for (std::size_t j = 0; j < d; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            acc += c.volatility(static_cast<Eigen::Index>(i),
                                static_cast<Eigen::Index>(j)) *
                   pf.stock(p, k, i);
          }
          sigma_pi[static_cast<Eigen::Index>(j)] = acc;
        }
        double matched = X(p, k) * (rho - 1.0);
        double plain = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double th = defl.theta(p, k, j);
          const double sp = sigma_pi[static_cast<Eigen::Index>(j)];
          matched += sp * rho * (dw[j] + th * dt);
          plain += (sp - X(p, k) * th) * dw[j];
        }
        integral += h * matched;
        riemann += h * plain;
        double pi_p = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          pi_p += pf.stock(p, k, i) * defl.residual(p, k, i);
        }
        drift += rho * h * pi_p * dt;
        income_h += rho * h * income.rate(p, k) * dt +
                    defl.deflator(p, k + 1) * lumps[k + 1];

        const double hx = defl.deflator(p, k + 1) * X(p, k + 1);
        const double res = hx - income_h - x0 - integral;
        worst = std::max(worst, std::abs(res));
        lowest = std::min(lowest, hx);
        magnitude = std::max({magnitude, std::abs(hx), std::abs(integral),
                              std::abs(income_h)});
        if (k + 2 == points) {
          r.residual[p] = res;
          r.riemann_residual[p] = hx - income_h - x0 - riemann;
        }
      }
      if (points == 1) r.residual[p] = worst;
      r.max_abs_residual[p] = worst;
      r.drift[p] = drift;
      r.scale[p] = 1.0 + magnitude;
      wealth.identity_residual[p] = r.residual[p];
      min_deflated[p] = lowest;
    }
  });
  for (std::size_t p = 0; p < paths; ++p) {
    r.max_relative = std::max(r.max_relative, r.max_abs_residual[p] / r.scale[p]);
    if (warned[p]) r.arbitrage_warning = true;
  }
  wealth.min_deflated = paths == 0
                            ? 0.0
                            : *std::min_element(min_deflated.begin(),
                                                min_deflated.end());
  return r;
}

TamenessReport tameness_monitor(const PathArray& values, double bound) {
  TamenessReport r;
  r.min = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < values.paths(); ++p) {
    for (std::size_t k = 0; k < values.points(); ++k) {
      if (values(p, k) < r.min) {
        r.min = values(p, k);
        r.argmin_path = p;
        r.argmin_step = k;
      }
    }
  }
  r.violated = r.min < bound;
  return r;
}

PathArray deflate(const PathArray& values, const DeflatorSet& defl) {
  if (values.paths() != defl.paths() || values.points() != defl.points()) {
    throw ValidationError("deflate: shape mismatch");
  }
  PathArray out(values.paths(), values.points());
  for (std::size_t p = 0; p < values.paths(); ++p) {
    for (std::size_t k = 0; k < values.points(); ++k) {
      out(p, k) = defl.deflator(p, k) * values(p, k);
    }
  }
  return out;
}

}  // namespace tameval
