#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tameval/arbitrage.hpp"
#include "tameval/market_model.hpp"
#include "tameval/portfolio.hpp"

namespace tameval {
namespace {

PortfolioProcess random_bounded_portfolio(const ScenarioSet& s, oracle::Rng& rng) {
  // Amounts depend on the current state only, so the portfolio is adapted.
  const double a = rng.uniform(-2.0, 2.0);
  const double b = rng.uniform(-1.0, 1.0);
  auto pf = PortfolioProcess::zeros(s.paths(), s.points(), s.assets());
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t k = 0; k < s.points(); ++k) {
      for (std::size_t i = 0; i < s.assets(); ++i) {
        pf.stock(p, k, i) = a * std::tanh(b * (s.prices(p, k, i) / s.prices(0, 0, i) - 1.0) + 0.3 * i);
      }
    }
  }
  return pf;
}

TEST(Wealth, AllInBond) {
  auto m = ParametricMarket::black_scholes(100.0, 0.04, 0.1, 0.2);
  const auto s = simulate(m, build_time_grid(2.0, 8), 5, 1);
  auto pf = PortfolioProcess::zeros(s.paths(), s.points(), 1);
  const auto w = wealth_paths(1.0, pf, IncomeStream::none(s.paths(), s.points()), s);
  for (std::size_t p = 0; p < s.paths(); ++p) {
    EXPECT_EQ(w.wealth(p, 0), 1.0);
    for (std::size_t k = 0; k < s.points(); ++k) {
      EXPECT_NEAR(w.wealth(p, k), s.bond(p, k), 1e-14 * s.bond(p, k));
      EXPECT_NEAR(pf.cash(p, k), w.wealth(p, k), 1e-15);
    }
  }
}

TEST(Wealth, PureIncome) {
  auto m = ParametricMarket::black_scholes(100.0, 0.0, 0.1, 0.2);
  const auto g = build_time_grid(1.0, 10);
  const auto s = simulate(m, g, 3, 1);
  auto income = IncomeStream::none(s.paths(), s.points());
  for (double& v : income.rate.data()) v = 1.0;
  const auto w = wealth_paths(2.0, PortfolioProcess::zeros(3, s.points(), 1), income, s);
  for (std::size_t k = 0; k < s.points(); ++k) {
    EXPECT_NEAR(w.wealth(1, k), 2.0 + g.time(k), 1e-14);
  }
}

TEST(Wealth, LumpAppliesAtCloseOfItsStep) {
  auto m = ParametricMarket::black_scholes(100.0, 0.0, 0.1, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 4), 2, 1);
  auto income = IncomeStream::none(2, 5);
  income.lumps.push_back({{2, 3}, {5.0, -1.0}});
  const auto w = wealth_paths(1.0, PortfolioProcess::zeros(2, 5, 1), income, s);
  EXPECT_EQ(w.wealth(0, 1), 1.0);
  EXPECT_EQ(w.wealth(0, 2), 6.0);
  EXPECT_EQ(w.wealth(0, 4), 6.0);
  EXPECT_EQ(w.wealth(1, 2), 1.0);
  EXPECT_EQ(w.wealth(1, 3), 0.0);
}

TEST(Wealth, HoldOneShareTracksPrice) {
  auto m = ParametricMarket::black_scholes(100.0, 0.0, 0.05, 0.2, 0.0, Scheme::kEuler);
  const auto s = simulate(m, build_time_grid(1.0, 50), 20, 3);
  const auto pf = PortfolioProcess::buy_and_hold(s, {1.0});
  const auto w = wealth_paths(100.0, pf, IncomeStream::none(20, 51), s);
  for (std::size_t p = 0; p < 20; ++p) {
    EXPECT_NEAR(w.wealth(p, 50), s.prices(p, 50), 1e-10);
  }
}

TEST(Wealth, GainFeedsBackExactly) {
  auto m = ParametricMarket::constant(Eigen::Vector2d(100.0, 50.0), 0.02,
                                      Eigen::Vector2d(0.05, 0.11), Eigen::Vector2d::Zero(),
                                      Eigen::MatrixXd{{0.2}, {0.2}}, Scheme::kEulerLog);
  const auto s = simulate(m, build_time_grid(1.0, 16), 40, 2);
  const auto pf = construct_arbitrage_portfolio(s, deflator_paths(s));
  const auto gain = simulate_gain(pf, s);
  const auto w = wealth_paths(0.0, pf, IncomeStream::none(40, 17), s);
  EXPECT_EQ(w.wealth, gain);
}

TEST(Identity, ZeroPortfolioZeroTheta) {
  auto m = ParametricMarket::black_scholes(100.0, 0.03, 0.03, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 8), 10, 1);
  const auto d = deflator_paths(s);
  auto pf = PortfolioProcess::zeros(10, 9, 1);
  const auto income = IncomeStream::none(10, 9);
  auto w = wealth_paths(3.0, pf, income, s);
  const auto r = deflated_wealth_identity_residual(w, income, d, pf, s);
  for (double v : r.residual) EXPECT_EQ(v, 0.0);
}

TEST(Identity, BuyAndHoldMatchedDiscretization) {
  auto m = ParametricMarket::black_scholes(100.0, 0.05, 0.11, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 50), 500, 4);
  const auto d = deflator_paths(s);
  auto pf = PortfolioProcess::buy_and_hold(s, {1.0});
  auto income = IncomeStream::none(500, 51);
  for (double& v : income.rate.data()) v = -0.5;
  income.lumps.push_back({std::vector<std::size_t>(500, 20), std::vector<double>(500, 2.0)});
  auto w = wealth_paths(100.0, pf, income, s);
  const auto r = deflated_wealth_identity_residual(w, income, d, pf, s);
  EXPECT_LE(r.max_relative, 1e-6);
  EXPECT_LE(r.max_relative, 1e-12);
  EXPECT_FALSE(r.arbitrage_warning);
  EXPECT_EQ(w.identity_residual, r.residual);
}

TEST(Identity, FailingMarketResidualIsDrift) {
  auto m = ParametricMarket::constant(Eigen::Vector2d(100.0, 50.0), 0.01,
                                      Eigen::Vector2d(0.06, 0.10), Eigen::Vector2d::Zero(),
                                      Eigen::MatrixXd{{0.2}, {0.2}}, Scheme::kEulerLog);
  const auto s = simulate(m, build_time_grid(1.0, 20), 100, 5);
  const auto d = deflator_paths(s);
  oracle::Rng rng(1);
  auto pf = random_bounded_portfolio(s, rng);
  const auto income = IncomeStream::none(100, 21);
  auto w = wealth_paths(1.0, pf, income, s);
  const auto r = deflated_wealth_identity_residual(w, income, d, pf, s);
  EXPECT_TRUE(r.arbitrage_warning);
  double biggest = 0.0;
  for (std::size_t p = 0; p < 100; ++p) {
    EXPECT_NEAR(r.residual[p], r.drift[p], 1e-12 * r.scale[p]);
    biggest = std::max(biggest, std::abs(r.drift[p]));
  }
  EXPECT_GT(biggest, 1e-4);
}

TEST(Identity, RiemannSumOnlyApproximate) {
  auto m = ParametricMarket::black_scholes(100.0, 0.02, 0.12, 0.3);
  const auto s = simulate(m, build_time_grid(1.0, 20), 200, 6);
  const auto d = deflator_paths(s);
  auto pf = PortfolioProcess::buy_and_hold(s, {1.0});
  const auto income = IncomeStream::none(200, 21);
  auto w = wealth_paths(100.0, pf, income, s);
  const auto r = deflated_wealth_identity_residual(w, income, d, pf, s);
  double worst = 0.0;
  for (double v : r.riemann_residual) worst = std::max(worst, std::abs(v));
  EXPECT_GT(worst, 1e-6);
  EXPECT_LE(r.max_relative, 1e-12);
}

TEST(Tameness, LongStockNotViolated) {
  auto m = ParametricMarket::black_scholes(100.0, 0.02, 0.12, 0.3);
  const auto s = simulate(m, build_time_grid(1.0, 20), 200, 6);
  const auto d = deflator_paths(s);
  PathArray price(200, 21);
  for (std::size_t p = 0; p < 200; ++p)
    for (std::size_t k = 0; k < 21; ++k) price(p, k) = s.prices(p, k);
  const auto t = tameness_monitor(deflate(price, d), -100.0);
  EXPECT_FALSE(t.violated);
  EXPECT_GT(t.min, 0.0);
}

TEST(Tameness, ShortCallReplicationCanGoNegative) {
  auto m = ParametricMarket::black_scholes(100.0, 0.05, 0.1, 0.2);
  const auto g = build_time_grid(1.0, 20);
  const auto s = simulate(m, g, 2000, 7);
  const auto d = deflator_paths(s);
  // Short one share against the initial call premium only.
  auto pf = PortfolioProcess::buy_and_hold(s, {-1.0});
  auto w = wealth_paths(oracle::bs_call(100, 100, 0.05, 0, 0.2, 1.0), pf,
                        IncomeStream::none(2000, 21), s);
  const auto t = tameness_monitor(deflate(w.wealth, d), 0.0);
  EXPECT_TRUE(t.violated);
  EXPECT_LT(d.deflator(t.argmin_path, t.argmin_step) * w.wealth(t.argmin_path, t.argmin_step), 0.0);
}

TEST(Martingale, DeflatedWealthHasZeroMeanChange) {
  auto m = ParametricMarket::constant(Eigen::Vector2d(100.0, 80.0), 0.02,
                                      Eigen::Vector2d(0.08, 0.05), Eigen::Vector2d(0.01, 0.0),
                                      Eigen::MatrixXd{{0.2, 0.05}, {0.1, 0.3}});
  const auto s = simulate(m, build_time_grid(1.0, 12), 20000, 12);
  const auto d = deflator_paths(s);
  oracle::Rng rng(44);
  for (int trial = 0; trial < 4; ++trial) {
    auto pf = random_bounded_portfolio(s, rng);
    auto w = wealth_paths(1.0, pf, IncomeStream::none(20000, 13), s);
    std::vector<double> x(20000);
    for (std::size_t p = 0; p < 20000; ++p) x[p] = d.deflator(p, 12) * w.wealth(p, 12) - 1.0;
    const auto e = mean_estimate(x);
    EXPECT_LE(std::abs(e.estimate), 4.0 * e.std_error) << trial;
  }
}

}  // namespace
}  // namespace tameval
