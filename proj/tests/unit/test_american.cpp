#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tameval/american.hpp"
#include "tameval/errors.hpp"
#include "tameval/lattice.hpp"
#include "tameval/market_model.hpp"

namespace tameval {
namespace {

// Hand-built two-step space: Y0 = 1.6; Y1 = 3 after an up move, 0 after a
// down move; Y2 = 0 after an initial up move, 1.5 otherwise.
DiscountedPayoffPaths two_step_space() {
  DiscountedPayoffPaths y;
  y.y = PathArray(4, 3);
  y.income = PathArray(4, 3);
  y.deflator = PathArray(4, 3, 1, 1.0);
  y.settlement = PathArray(4, 3);
  y.horizon.assign(4, 2);
  y.weights.assign(4, 0.25);
  y.exact = true;
  for (std::size_t p = 0; p < 4; ++p) {
    const bool up = p >> 1;
    y.y(p, 0) = 1.6;
    y.y(p, 1) = up ? 3.0 : 0.0;
    y.y(p, 2) = up ? 0.0 : 1.5;
    for (std::size_t k = 0; k < 3; ++k) y.settlement(p, k) = y.y(p, k);
  }
  return y;
}

LatticePaths random_lattice(oracle::Rng& rng, std::size_t n) {
  const double up = rng.uniform(1.05, 1.4);
  const double q = rng.uniform(0.2, 0.8);
  const double rate = rng.uniform(0.0, 0.1);
  static std::vector<std::vector<double>> table;
  table.assign(n + 1, std::vector<double>(n + 1));
  for (auto& row : table)
    for (double& v : row) v = rng.integer(0, 20);
  const auto lat = Lattice::custom(1.0, up, 1.0 / up, rate, 1.0, n, q);
  auto copy = table;
  return lattice_paths(lat, [copy](std::size_t k, std::size_t j) { return copy[k][j]; });
}

double snell_of(const LatticePaths& lp, std::size_t n) { return tree_supremum(lp.payoff, n); }

TEST(Payoff, ConstantSettlementNoDiscounting) {
  auto m = ParametricMarket::black_scholes(100.0, 0.0, 0.0, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 4), 5, 1);
  AmericanClaim c;
  c.settlement = Payoff::constant(1.0);
  const auto y = discounted_payoff(c, s, deflator_paths(s));
  for (double v : y.y.data()) EXPECT_EQ(v, 1.0);
}

TEST(Payoff, IncomeOnly) {
  auto m = ParametricMarket::black_scholes(100.0, 0.0, 0.0, 0.2);
  const auto g = build_time_grid(1.0, 4);
  const auto s = simulate(m, g, 5, 1);
  AmericanClaim c;
  c.rate = Payoff::constant(1.0);
  const auto y = discounted_payoff(c, s, deflator_paths(s));
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(y.y(2, k), g.time(k), 1e-15);
}

TEST(Payoff, PutComposition) {
  auto m = ParametricMarket::black_scholes(100.0, 0.05, 0.1, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 4), 5, 1);
  const auto d = deflator_paths(s);
  AmericanClaim c;
  c.settlement = Payoff::put(100.0);
  const auto y = discounted_payoff(c, s, d);
  for (std::size_t k = 0; k < 5; ++k) {
    const double expect =
        d.density(3, k) * s.discount(3, k) * std::max(100.0 - s.prices(3, k), 0.0);
    EXPECT_NEAR(y.y(3, k), expect, 1e-13);
  }
  EXPECT_EQ(y.y(3, 0), 0.0);
}

TEST(Combine, Idempotent) {
  const auto y = two_step_space();
  PrefixEstimator est(2, y.weights);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto t = StoppingRule::fixed(k, y);
    EXPECT_EQ(combine_stopping_times(t, t, y, est), t);
  }
}

TEST(Combine, IncreasingPayoffAlwaysWaits) {
  auto m = ParametricMarket::black_scholes(100.0, 0.0, 0.0, 0.2);
  const auto s = simulate(m, build_time_grid(1.0, 6), 400, 1);
  AmericanClaim c;
  c.rate = Payoff::constant(1.0);
  const auto y = discounted_payoff(c, s, deflator_paths(s));
  RegressionEstimator est(s, y, 2, false);
  const auto r = combine_stopping_times(StoppingRule::fixed(2, y), StoppingRule::fixed(5, y), y, est);
  for (auto k : r.index) EXPECT_EQ(k, 5u);
}

TEST(Combine, DominatesBothOnRandomLattices) {
  oracle::Rng rng(77);
  const auto rules = oracle::region_stopping_times(4);
  for (int trial = 0; trial < 3; ++trial) {
    const auto lp = random_lattice(rng, 4);
    const auto& y = lp.payoff;
    PrefixEstimator est(4, y.weights);
    for (std::size_t a = 0; a < rules.size(); a += 3) {
      for (std::size_t b = 0; b < rules.size(); b += 5) {
        const StoppingRule t1{rules[a], ""}, t2{rules[b], ""};
        const auto t = combine_stopping_times(t1, t2, y, est);
        const double v = rule_value(t, y).estimate;
        EXPECT_GE(v, std::max(rule_value(t1, y).estimate, rule_value(t2, y).estimate) - 1e-12);
      }
    }
  }
}

TEST(Tournament, LatestFirstEqualsSnell) {
  const auto y = two_step_space();
  PrefixEstimator est(2, y.weights);
  const auto t = improve_to_value(fixed_date_candidates(y), y, est);
  EXPECT_EQ(t.final.estimate, 2.25);
  EXPECT_EQ(t.decreases, 0u);
  EXPECT_EQ(tree_supremum(y, 2), 2.25);
}

TEST(Tournament, EarliestFirstIsOnlyALowerBound) {
  const auto y = two_step_space();
  PrefixEstimator est(2, y.weights);
  const auto t = improve_to_value(fixed_date_candidates(y), y, est, TournamentOrder::kEarliestFirst);
  EXPECT_EQ(t.final.estimate, 1.6);
  EXPECT_LT(t.final.estimate, tree_supremum(y, 2));
}

TEST(Tournament, SingleCandidate) {
  const auto y = two_step_space();
  PrefixEstimator est(2, y.weights);
  const auto t = improve_to_value({StoppingRule::fixed(1, y)}, y, est);
  ASSERT_EQ(t.values.size(), 1u);
  EXPECT_EQ(t.values[0], 1.5);
  EXPECT_EQ(t.rule.index, StoppingRule::fixed(1, y).index);
}

TEST(Tournament, MonotoneAndExactOnRandomLattices) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(2, 9));
    const auto lp = random_lattice(rng, n);
    PrefixEstimator est(n, lp.payoff.weights);
    const auto t = improve_to_value(fixed_date_candidates(lp.payoff), lp.payoff, est);
    for (std::size_t i = 1; i < t.values.size(); ++i) {
      EXPECT_GE(t.values[i], t.values[i - 1] - 1e-12);
    }
    const double snell = snell_of(lp, n);
    EXPECT_NEAR(t.final.estimate, snell, 1e-12 * (1.0 + snell));
    EXPECT_EQ(t.final.std_error, 0.0);
  }
}

TEST(Envelope, FeasibleAtValueAndViolatedWhenUnderfunded) {
  const auto l = Lattice::crr(100.0, 0.05, 0.2, 1.0, 10);
  const auto lp = lattice_paths(l, node_function(l, Payoff::put(100.0)));
  PrefixEstimator est(10, lp.payoff.weights);
  const auto env = snell_envelope(lp.payoff, est);
  const double ua = snell_lattice_oracle(l, [&](std::size_t k, std::size_t j) {
                      return std::max(100.0 - l.price(k, j), 0.0);
                    }).value;
  EXPECT_NEAR(env.value, ua, 1e-12);
  const auto ok = exercise_feasibility_check(lp.payoff, env, env.value);
  EXPECT_GE(ok.min_slack, 0.0);
  EXPECT_FALSE(ok.violated);
  const auto under = exercise_feasibility_check(lp.payoff, env, 0.5 * ua);
  EXPECT_TRUE(under.violated);
}

TEST(Envelope, NonnegativeSettlementZeroClaim) {
  const auto l = Lattice::crr(100.0, 0.05, 0.2, 1.0, 6);
  const auto lp = lattice_paths(l, [](std::size_t, std::size_t) { return 0.0; });
  PrefixEstimator est(6, lp.payoff.weights);
  const auto env = snell_envelope(lp.payoff, est);
  const auto r = exercise_feasibility_check(lp.payoff, env, 0.0);
  EXPECT_EQ(r.min_slack, 0.0);
  EXPECT_FALSE(r.violated);
}

struct PutRun {
  ScenarioSet s;
  DeflatorSet d;
};

PutRun put_market(std::size_t paths, std::uint64_t seed) {
  auto m = ParametricMarket::black_scholes(100.0, 0.05, 0.08, 0.2);
  PutRun r{simulate(m, build_time_grid(1.0, 50), paths, seed), {}};
  r.d = deflator_paths(r.s);
  return r;
}

TEST(Price, AmericanPutBracket) {
  const auto run = put_market(20000, 31);
  AmericanClaim c;
  c.settlement = Payoff::put(100.0);
  const auto res = price_sacc(c, run.s, run.d);
  const double se = res.report.std_error;
  const double oracle_value = 6.089595282977953;
  EXPECT_GE(res.report.estimate, oracle::bs_put(100, 100, 0.05, 0, 0.2, 1) - 3.0 * se);
  EXPECT_LE(res.report.estimate, oracle_value + std::max(3.0 * se, 0.01 * oracle_value));
  EXPECT_GE(res.report.estimate, res.european_value - 2.0 * se);
  EXPECT_FALSE(res.trace.near_bound);
  EXPECT_EQ(res.trace.values.size(), 51u);
  std::size_t exercised = 0;
  for (const auto& row : res.exercise_region) exercised += row.exercised;
  EXPECT_GT(exercised, 0u);
}

TEST(Price, NonnegativeIncomeWaitsForHorizon) {
  const auto run = put_market(2000, 32);
  AmericanClaim c;
  c.rate = Payoff::constant(1.0);
  const auto res = price_sacc(c, run.s, run.d);
  for (auto k : res.trace.rule.index) EXPECT_EQ(k, 50u);
  EXPECT_NEAR(res.report.estimate, res.european_value, 1e-14);
  EXPECT_TRUE(res.trace.near_bound);
}

TEST(Price, SecondDriverIsIrrelevant) {
  auto one = ParametricMarket::black_scholes(100.0, 0.05, 0.08, 0.2);
  auto two = ParametricMarket::constant(Eigen::VectorXd::Constant(1, 100.0), 0.05,
                                        Eigen::VectorXd::Constant(1, 0.08),
                                        Eigen::VectorXd::Zero(1), Eigen::MatrixXd{{0.2, 0.0}});
  AmericanClaim c;
  c.settlement = Payoff::put(100.0);
  c.driver_support = {0};
  const auto g = build_time_grid(1.0, 25);
  const auto s1 = simulate(one, g, 20000, 41);
  const auto s2 = simulate(two, g, 20000, 42);
  const auto a = price_sacc(c, s1, deflator_paths(s1));
  const auto b = price_sacc(c, s2, deflator_paths(s2));
  const double combined = std::hypot(a.report.std_error, b.report.std_error);
  EXPECT_LE(std::abs(a.report.estimate - b.report.estimate), 3.0 * combined);
}

TEST(Envelope, HeldOutSupermartingale) {
  const auto run = put_market(20000, 33);
  AmericanClaim c;
  c.settlement = Payoff::put(100.0);
  const auto y = discounted_payoff(c, run.s, run.d);
  const auto check = held_out_supermartingale_check(run.s, y);
  EXPECT_TRUE(check.passed) << check.max_z << " at " << check.worst_point;
}

TEST(Envelope, MonteCarloSlackNearlyFeasible) {
  const auto run = put_market(10000, 34);
  AmericanClaim c;
  c.settlement = Payoff::put(100.0);
  const auto y = discounted_payoff(c, run.s, run.d);
  RegressionEstimator est(run.s, y, 4, false);
  const auto env = snell_envelope(y, est);
  const auto r = exercise_feasibility_check(y, env, env.value);
  EXPECT_FALSE(r.violated);
  EXPECT_TRUE(exercise_feasibility_check(y, env, 0.5 * env.value).violated);
}

TEST(Validation, Inputs) {
  const auto y = two_step_space();
  EXPECT_THROW(improve_to_value({}, y, PrefixEstimator(2, y.weights)), ValidationError);
  EXPECT_THROW(PrefixEstimator(3, y.weights), ValidationError);
  StoppingRule bad{{0, 1}, ""};
  EXPECT_THROW(rule_value(bad, y), ValidationError);
  EXPECT_THROW(parse_tournament_order("sideways"), ValidationError);
}

}  // namespace
}  // namespace tameval
