#include "tameval/arbitrage.hpp"

#include <algorithm>
#include <cmath>

#include "tameval/errors.hpp"

namespace tameval {

ArbitrageReport detect_state_arbitrage(const ScenarioSet& s,
                                       const DeflatorSet& defl, double tol) {
  if (!(tol > 0.0)) throw ValidationError("arbitrage tolerance must be > 0");
  if (defl.paths() != s.paths() || defl.points() != s.points()) {
    throw ValidationError("deflators do not match the scenarios");
  }
  ArbitrageReport r;
  r.tolerance = tol;
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t k = 0; k < s.points(); ++k) {
      const double norm = defl.residual_norm(p, k);
      r.max_residual_norm = std::max(r.max_residual_norm, norm);
      if (norm > tol) {
        ++r.offending_count;
        if (r.offending.size() < 100) r.offending.emplace_back(p, k);
      }
    }
  }
  r.is_state_arbitrage_free = r.offending_count == 0;
  return r;
}

PortfolioProcess construct_arbitrage_portfolio(const ScenarioSet& s,
                                               const DeflatorSet& defl,
                                               double tol) {
  if (defl.paths() != s.paths() || defl.points() != s.points()) {
    throw ValidationError("deflators do not match the scenarios");
  }
  auto pf = PortfolioProcess::zeros(s.paths(), s.points(), s.assets());
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t k = 0; k < s.points(); ++k) {
      const double norm = defl.residual_norm(p, k);
      if (!(norm > tol)) continue;
      for (std::size_t i = 0; i < s.assets(); ++i) {
        pf.stock(p, k, i) = defl.residual(p, k, i) / norm;
      }
    }
  }
  wealth_paths(0.0, pf, IncomeStream::none(s.paths(), s.points()), s);
  return pf;
}

PathArray simulate_gain(const PortfolioProcess& portfolio, const ScenarioSet& s) {
  return wealth_paths(0.0, portfolio, IncomeStream::none(s.paths(), s.points()), s)
      .wealth;
}

}  // namespace tameval
