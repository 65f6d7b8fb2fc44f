#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tameval/arbitrage.hpp"
#include "tameval/errors.hpp"
#include "tameval/market_model.hpp"

namespace tameval {
namespace {

std::shared_ptr<ParametricMarket> failing_market(double r = 0.0) {
  return ParametricMarket::constant(Eigen::Vector2d(100.0, 50.0), r,
                                    Eigen::Vector2d(0.05 + r, 0.09 + r),
                                    Eigen::Vector2d::Zero(), Eigen::MatrixXd{{0.2}, {0.2}},
                                    Scheme::kEulerLog);
}

TEST(Detect, BlackScholesIsFree) {
  auto m = ParametricMarket::black_scholes(100.0, 0.05, 0.12, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 10), 100, 1);
  const auto r = detect_state_arbitrage(s, deflator_paths(s));
  EXPECT_TRUE(r.is_state_arbitrage_free);
  EXPECT_LE(r.max_residual_norm, 1e-15);
}

TEST(Detect, EqualColumnsFlagged) {
  const auto s = simulate(failing_market(), build_time_grid(1.0, 10), 50, 1);
  const auto r = detect_state_arbitrage(s, deflator_paths(s));
  EXPECT_FALSE(r.is_state_arbitrage_free);
  EXPECT_NEAR(r.max_residual_norm, 0.0282842712474619, 1e-14);
  EXPECT_EQ(r.offending_count, 50u * 11u);
  EXPECT_EQ(r.offending.size(), 100u);
}

TEST(Detect, ZeroExcessWithArbitrarySigma) {
  auto z = ParametricMarket::constant(Eigen::Vector2d(1.0, 2.0), 0.03,
                                      Eigen::Vector2d(0.01, 0.0), Eigen::Vector2d(0.02, 0.03),
                                      Eigen::MatrixXd{{0.3, 0.7}, {0.1, -0.2}});
  const auto s = simulate(z, build_time_grid(1.0, 4), 5, 1);
  const auto r = detect_state_arbitrage(s, deflator_paths(s));
  EXPECT_TRUE(r.is_state_arbitrage_free);
  EXPECT_EQ(r.max_residual_norm, 0.0);
}

TEST(Detect, RejectsNonPositiveTolerance) {
  auto m = ParametricMarket::black_scholes(100.0, 0.05, 0.12, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 2), 3, 1);
  EXPECT_THROW(detect_state_arbitrage(s, deflator_paths(s), 0.0), ValidationError);
}

TEST(Construct, FreeMarketGivesZeroPortfolio) {
  auto m = ParametricMarket::black_scholes(100.0, 0.05, 0.12, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 8), 20, 1);
  const auto pf = construct_arbitrage_portfolio(s, deflator_paths(s));
  for (double v : pf.stock.data()) EXPECT_EQ(v, 0.0);
  for (double v : simulate_gain(pf, s).data()) EXPECT_EQ(v, 0.0);
}

TEST(Construct, FailingMarketGainIsDeterministic) {
  const double r = 0.03;
  const auto g = build_time_grid(1.0, 8);
  const auto s = simulate(failing_market(r), g, 200, 2);
  const auto d = deflator_paths(s);
  const auto pf = construct_arbitrage_portfolio(s, d);
  const double inv = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(pf.stock(0, 0, 0), -inv, 1e-14);
  EXPECT_NEAR(pf.stock(0, 0, 1), inv, 1e-14);
  const auto gain = simulate_gain(pf, s);
  const double pnorm = 0.02 * std::sqrt(2.0);
  for (std::size_t p = 0; p < s.paths(); ++p) {
    // gamma G accumulates gamma |p| dt; integrate by hand on the grid.
    double gg = 0.0;
    for (std::size_t k = 0; k < g.steps(); ++k) {
      gg += std::exp(-r * g.time(k)) * pnorm * g.dt(k);
      const double expect = gg * std::exp(r * g.time(k + 1));
      EXPECT_NEAR(gain(p, k + 1), expect, 1e-12);
      EXPECT_GT(gain(p, k + 1), 0.0);
      EXPECT_GE(d.deflator(p, k + 1) * gain(p, k + 1), 0.0);
    }
    // Cash leg keeps the portfolio self-financing.
    EXPECT_NEAR(pf.cash(p, 3), gain(p, 3) - pf.stock(p, 3, 0) - pf.stock(p, 3, 1), 1e-14);
  }
}

TEST(Construct, TimeLocalizedFailure) {
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd vol{{0.2}, {0.2}};
  CoefficientPiece early{0.5, 0.02, Eigen::Vector2d(0.07, 0.11), Eigen::Vector2d::Zero(), vol};
  CoefficientPiece late{inf, 0.02, Eigen::Vector2d(0.09, 0.09), Eigen::Vector2d::Zero(), vol};
  auto m = std::make_shared<ParametricMarket>(Eigen::Vector2d(1.0, 1.0),
                                              std::vector{early, late}, Scheme::kEulerLog);
  const auto g = build_time_grid(1.0, 10);
  const auto s = simulate(m, g, 50, 4);
  const auto d = deflator_paths(s);
  const auto gain = simulate_gain(construct_arbitrage_portfolio(s, d), s);
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t k = 1; k < s.points(); ++k) {
      EXPECT_GT(gain(p, k), 0.0);
      if (g.time(k) > 0.5 + 1e-12) {
        EXPECT_NEAR(gain(p, k) * s.discount(p, k), gain(p, 5) * s.discount(p, 5), 1e-15);
      }
    }
  }
}

TEST(Gain, BuyAndHoldTelescopesInEulerScheme) {
  auto m = ParametricMarket::black_scholes(100.0, 0.0, 0.07, 0.3, 0.0, Scheme::kEuler);
  const auto s = simulate(m, build_time_grid(1.0, 32), 100, 6);
  const auto pf = PortfolioProcess::buy_and_hold(s, {1.0});
  const auto gain = simulate_gain(pf, s);
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t k = 0; k < s.points(); ++k) {
      EXPECT_NEAR(gain(p, k), s.prices(p, k) - 100.0, 1e-10);
    }
  }
}

TEST(Gain, ArbitragePortfolioIsStateTameAndPositive) {
  const auto s = simulate(failing_market(0.01), build_time_grid(1.0, 20), 1000, 9);
  const auto d = deflator_paths(s);
  const auto gain = simulate_gain(construct_arbitrage_portfolio(s, d), s);
  const auto tame = tameness_monitor(deflate(gain, d), -1e-8);
  EXPECT_FALSE(tame.violated);
  std::size_t positive = 0;
  for (std::size_t p = 0; p < s.paths(); ++p) positive += d.deflator(p, 20) * gain(p, 20) > 0.0;
  EXPECT_EQ(positive, s.paths());
}

TEST(Gain, FreeMarketTamePortfoliosHaveNoPositiveDrift) {
  auto m = ParametricMarket::constant(Eigen::Vector2d(100.0, 80.0), 0.02,
                                      Eigen::Vector2d(0.08, 0.05), Eigen::Vector2d::Zero(),
                                      Eigen::MatrixXd{{0.2, 0.05}, {0.1, 0.3}});
  const auto s = simulate(m, build_time_grid(1.0, 12), 20000, 10);
  const auto d = deflator_paths(s);
  oracle::Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> shares{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    const auto gain = simulate_gain(PortfolioProcess::buy_and_hold(s, shares), s);
    std::vector<double> hg(s.paths());
    for (std::size_t p = 0; p < s.paths(); ++p) hg[p] = d.deflator(p, 12) * gain(p, 12);
    const auto e = mean_estimate(hg);
    EXPECT_LE(e.estimate, 4.0 * e.std_error);
  }
}

}  // namespace
}  // namespace tameval
