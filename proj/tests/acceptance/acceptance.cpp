// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "tameval/american.hpp"
#include "tameval/arbitrage.hpp"
#include "tameval/deflator.hpp"
#include "tameval/european.hpp"
#include "tameval/lattice.hpp"
#include "tameval/market_model.hpp"
#include "tameval/portfolio.hpp"
#include "tameval/projection.hpp"

namespace {

using namespace tameval;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string g(double v) { return fmt("%.6g", v); }

Eigen::MatrixXd random_matrix(oracle::Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// 1. Projection exactness on random, possibly rank-deficient slices.
Outcome projection_exactness() {
  oracle::Rng rng(101);
  double worst_fit = 0.0, worst_perp = 0.0, worst_norm_gain = 0.0;
  std::size_t deficient = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.integer(1, 6), d = rng.integer(1, 6);
    const int r = rng.integer(0, std::min(n, d));
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, d);
    if (r > 0) sigma = random_matrix(rng, n, r) * random_matrix(rng, r, d) * 0.3;
    deficient += r < std::min(n, d);
    const Eigen::VectorXd excess = random_matrix(rng, n, 1) * 0.1;
    const auto slice = market_price_of_risk(sigma, excess);
    const double scale = 1.0 + excess.norm();
    worst_fit = std::max(worst_fit, (sigma * slice.theta + slice.residual - excess).norm() / scale);
    worst_perp = std::max(worst_perp,
                          (sigma.transpose() * slice.residual).norm() / (scale * (1.0 + sigma.norm())));
    // Kernel of sigma from an independent decomposition.
    const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(sigma).kernel();
    const bool trivial = kernel.cols() == 1 && kernel.norm() == 0.0;
    if (trivial) continue;
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd v = kernel * random_matrix(rng, kernel.cols(), 1);
      const double gain = slice.theta.norm() - (slice.theta + v).norm();
      worst_norm_gain = std::max(worst_norm_gain, gain);
    }
  }
  const bool ok = worst_fit <= 1e-10 && worst_perp <= 1e-10 && worst_norm_gain <= 1e-12;
  return {ok, "max |sigma theta + p - excess|/(1+|excess|) = " + g(worst_fit) +
                  ", max |sigma'p| rel = " + g(worst_perp) +
                  ", max norm decrease by kernel shift = " + g(worst_norm_gain) + " (" +
                  std::to_string(deficient) + " rank-deficient slices)"};
}

// 2. Arbitrage detection and construction, both directions.
Outcome arbitrage_characterization() {
  auto failing = ParametricMarket::constant(Eigen::Vector2d(100.0, 50.0), 0.03,
                                            Eigen::Vector2d(0.07, 0.06), Eigen::Vector2d::Zero(),
                                            Eigen::MatrixXd{{0.2}, {0.3}});
  const auto s = simulate(failing, build_time_grid(1.0, 50), 10000, 201);
  const auto d = deflator_paths(s);
  const auto arb = detect_state_arbitrage(s, d);
  const auto pf = construct_arbitrage_portfolio(s, d);
  const PathArray gain = simulate_gain(pf, s);
  const std::size_t last = s.points() - 1;
  std::size_t negative = 0, positive = 0;
  for (std::size_t p = 0; p < s.paths(); ++p) {
    const double hg = d.deflator(p, last) * gain(p, last);
    negative += hg < 0.0;
    positive += hg > 0.0;
  }
  const double frac = static_cast<double>(positive) / static_cast<double>(s.paths());
  const bool a_ok = !arb.is_state_arbitrage_free && negative == 0 && frac > 0.99;

  auto bs = ParametricMarket::black_scholes(100.0, 0.05, 0.09, 0.2);
  const auto sb = simulate(bs, build_time_grid(1.0, 50), 10000, 202);
  const auto db = deflator_paths(sb);
  const bool free = detect_state_arbitrage(sb, db).is_state_arbitrage_free;
  oracle::Rng rng(203);
  double worst_z = -1e300;
  const std::size_t lb = sb.points() - 1;
  for (int t = 0; t < 20; ++t) {
    const double a = rng.uniform(-100.0, 100.0), b = rng.uniform(-3.0, 3.0),
                 c = rng.uniform(-1.0, 1.0);
    auto pf_b = PortfolioProcess::zeros(sb.paths(), sb.points(), 1);
    for (std::size_t p = 0; p < sb.paths(); ++p) {
      for (std::size_t k = 0; k < sb.points(); ++k) {
        pf_b.stock(p, k, 0) = a * std::tanh(b * (sb.prices(p, k) / 100.0 - 1.0) + c);
      }
    }
    const PathArray gb = simulate_gain(pf_b, sb);
    std::vector<double> v(sb.paths());
    for (std::size_t p = 0; p < sb.paths(); ++p) v[p] = db.deflator(p, lb) * gb(p, lb);
    const auto m = mean_estimate(v);
    worst_z = std::max(worst_z, m.estimate / m.std_error);
  }
  const bool b_ok = free && worst_z <= 4.0;
  return {a_ok && b_ok, "(a) flagged=" + std::string(arb.is_state_arbitrage_free ? "no" : "yes") +
                            ", H G(T) < 0 on " + std::to_string(negative) + " paths, > 0 on " +
                            fmt("%.4f", frac) + "; (b) free=" + (free ? "yes" : "no") +
                            ", max mean/SE of H G(T) over 20 portfolios = " + fmt("%.3f", worst_z)};
}

// 3. Black-Scholes European call and parity.
Outcome black_scholes_european() {
  const double s0 = 100, k = 100, r = 0.05, vol = 0.2, t = 1.0;
  auto m = ParametricMarket::black_scholes(s0, r, 0.09, vol);
  const auto s = simulate(m, build_time_grid(t, 1), 200000, 301);
  const auto d = deflator_paths(s);
  EuropeanClaim call, put;
  call.payoff = Payoff::call(k);
  put.payoff = Payoff::put(k);
  const auto c = price_secc(call, s, d);
  const auto p = price_secc(put, s, d);
  const double oracle_call = oracle::bs_call(s0, k, r, 0.0, vol, t);
  std::vector<double> diff(s.paths());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = c.path_values[i] - p.path_values[i];
  const auto pd = mean_estimate(diff);
  const double parity = s0 - k * std::exp(-r * t);
  const bool ok = std::abs(c.estimate - oracle_call) <= 3.0 * c.std_error &&
                  std::abs(pd.estimate - parity) <= 3.0 * pd.std_error;
  return {ok, "call " + g(c.estimate) + " +- " + g(c.std_error) + " vs " + g(oracle_call) +
                  "; call - put " + g(pd.estimate) + " +- " + g(pd.std_error) + " vs " +
                  g(parity)};
}

// 4. Strict local martingale deflator.
Outcome strict_local_martingale() {
  auto m = std::make_shared<BesselDeflatorMarket>(100.0, 0.0, 0.2);
  const auto sample = sample_terminal(m, build_time_grid(1.0, 4096), 200000, 401);
  const auto ez = estimate_ez0(sample.density);
  const double target = oracle::bessel3_inverse_mean(1.0);
  const bool ok = std::abs(ez.estimate - target) <= 3.0 * ez.std_error && ez.ci_high < 1.0;
  return {ok, "E Z0(T) = " + g(ez.estimate) + " +- " + g(ez.std_error) + " vs " + g(target)};
}

std::vector<std::vector<double>> random_table(oracle::Rng& rng, std::size_t n, int hi) {
  std::vector<std::vector<double>> t(n + 1, std::vector<double>(n + 1));
  for (auto& row : t)
    for (double& v : row) v = rng.integer(0, hi);
  return t;
}

NodeFunction table_function(std::vector<std::vector<double>> t) {
  return [t = std::move(t)](std::size_t k, std::size_t j) { return t[k][j]; };
}

std::size_t combination_pairs(const LatticePaths& lp, std::size_t n,
                        const std::vector<std::vector<std::size_t>>& rules, std::size_t& bad) {
  const PrefixEstimator est(n, lp.payoff.weights);
  std::vector<double> value(rules.size());
  std::vector<StoppingRule> sr(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    sr[i] = StoppingRule{rules[i], ""};
    value[i] = rule_value(sr[i], lp.payoff).estimate;
  }
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < rules.size(); ++a) {
    for (std::size_t b = 0; b < rules.size(); ++b) {
      const auto t = combine_stopping_times(sr[a], sr[b], lp.payoff, est);
      if (!(rule_value(t, lp.payoff).estimate >= std::max(value[a], value[b]))) ++bad;
      ++pairs;
    }
  }
  return pairs;
}

// 5. Combined rule dominates both inputs, in exact (dyadic) arithmetic.
Outcome combination_exhaustive() {
  // p* = 1/2 and r = 0: every weight and conditional mean is a dyadic rational.
  const auto lat5 = Lattice::custom(1.0, 1.5, 0.5, 0.0, 1.0, 5, 0.5);
  const auto lat4 = Lattice::custom(1.0, 1.5, 0.5, 0.0, 1.0, 4, 0.5);
  oracle::Rng rng(501);
  std::size_t bad = 0, pairs = 0;
  const auto regions = oracle::region_stopping_times(5);
  pairs += combination_pairs(lattice_paths(lat5, table_function(random_table(rng, 5, 40))), 5, regions, bad);
  const auto adapted = oracle::all_stopping_times(4);
  pairs += combination_pairs(lattice_paths(lat4, table_function(random_table(rng, 4, 40))), 4, adapted, bad);
  return {bad == 0, std::to_string(pairs) + " pairs (" + std::to_string(regions.size()) +
                        " region rules on 5 steps, " + std::to_string(adapted.size()) +
                        " adapted rules on 4 steps), " + std::to_string(bad) + " violations"};
}

// 6. Tournament equals backward induction; brute force confirms the oracle.
Outcome tournament_equals_snell() {
  oracle::Rng rng(601);
  double worst = 0.0, worst_brute = 0.0, worst_literal = 0.0;
  for (int f = 0; f < 10; ++f) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(1, 10));
    const double up = rng.uniform(1.02, 1.3);
    const auto lat = Lattice::custom(100.0, up, 1.0 / up, rng.uniform(0.0, 0.08), 1.0, n,
                                     rng.uniform(0.2, 0.8));
    const auto table = random_table(rng, n, 30);
    const auto lp = lattice_paths(lat, table_function(table));
    const PrefixEstimator est(n, lp.payoff.weights);
    const double tour = improve_to_value(fixed_date_candidates(lp.payoff), lp.payoff, est).final.estimate;
    const double snell = snell_lattice_oracle(lat, table_function(table)).value;
    worst = std::max(worst, std::abs(tour - snell) / (1.0 + std::abs(snell)));
    if (n <= 6) {
      const double brute = tree_supremum(lp.payoff, n);
      worst_brute = std::max(worst_brute, std::abs(brute - snell) / (1.0 + std::abs(snell)));
    }
    if (n <= 4) {
      double best = -1e300;
      for (const auto& tau : oracle::all_stopping_times(n)) {
        best = std::max(best, rule_value(StoppingRule{tau, ""}, lp.payoff).estimate);
      }
      worst_literal = std::max(worst_literal, std::abs(best - snell) / (1.0 + std::abs(snell)));
    }
  }
  const double eps = 64 * std::numeric_limits<double>::epsilon();
  const bool ok = worst <= eps && worst_brute <= eps && worst_literal <= eps;
  return {ok, "max rel gap tournament vs backward induction " + g(worst) +
                  ", tree brute force vs oracle " + g(worst_brute) +
                  ", literal enumeration vs oracle " + g(worst_literal) + " (bound " + g(eps) + ")"};
}

// 7. American put bracket.
Outcome american_put_bracket() {
  const double s0 = 100, k = 100, r = 0.05, vol = 0.2, t = 1.0;
  auto m = ParametricMarket::black_scholes(s0, r, 0.09, vol);
  const auto s = simulate(m, build_time_grid(t, 50), 100000, 701);
  const auto d = deflator_paths(s);
  AmericanClaim put;
  put.settlement = Payoff::put(k);
  const auto res = price_sacc(put, s, d);
  const double se = res.report.std_error;
  const double euro = oracle::bs_put(s0, k, r, 0.0, vol, t);
  const double lattice = snell_lattice_oracle(Lattice::crr(s0, r, vol, t, 1000), put).value;
  const double lo = euro - 3.0 * se;
  const double hi = lattice + std::max(3.0 * se, 0.01 * lattice);
  const bool ok = res.report.estimate >= lo && res.report.estimate <= hi;
  return {ok, "estimate " + g(res.report.estimate) + " +- " + g(se) + " in [" + g(lo) + ", " +
                  g(hi) + "] (European " + g(euro) + ", lattice " + g(lattice) + ")"};
}

// 8. Degenerate volatility: attainability and pricing.
Outcome degenerate_completeness() {
  BrownianFactor second{1, 0.0, 0.0, 1.0};
  auto deg = ParametricMarket::constant(Eigen::VectorXd::Constant(1, 100.0), 0.05,
                                        Eigen::VectorXd::Constant(1, 0.09),
                                        Eigen::VectorXd::Zero(1), Eigen::MatrixXd{{0.2, 0.0}},
                                        Scheme::kLogExactConstant, second);
  auto one = ParametricMarket::black_scholes(100.0, 0.05, 0.09, 0.2);
  const auto grid = build_time_grid(1.0, 20);
  const auto s2 = simulate(deg, grid, 100000, 801);
  const auto s1 = simulate(one, grid, 100000, 802);
  const auto d2 = deflator_paths(s2);
  const auto d1 = deflator_paths(s1);
  const bool att1 = attainability_check(s2, {0}).attainable;
  const auto both = attainability_check(s2, {0, 1});
  EuropeanClaim call;
  call.payoff = Payoff::call(100.0);
  call.driver_support = {0};
  const auto c2 = price_secc(call, s2, d2);
  const auto c1 = price_secc(call, s1, d1);
  const double combined = std::hypot(c1.std_error, c2.std_error);

  const auto sh = simulate(deg, grid, 20000, 803);
  const auto dh = deflator_paths(sh);
  EuropeanClaim w2;
  w2.payoff.family = PayoffFamily::kAuxCall;
  w2.payoff.scale = 1.0;
  w2.driver_support = {1};
  const auto h = hedge_claim(w2, sh, dh);
  const bool ok = att1 && !both.attainable && !both.rank_condition &&
                  std::abs(c1.estimate - c2.estimate) <= 3.0 * combined && !h.replicable &&
                  h.median_replication_residual > 0.05;
  return {ok, std::string("support {1} attainable=") + (att1 ? "yes" : "no") +
                  ", {1,2} attainable=" + (both.attainable ? "yes" : "no") + " (min rank " +
                  std::to_string(both.min_rank) + "); call " + g(c2.estimate) + " vs d=1 " +
                  g(c1.estimate) + " (3 SE = " + g(3.0 * combined) + "); W2 claim median residual " +
                  g(h.median_replication_residual) + ", flagged at " +
                  std::to_string(h.flagged_points) + " points"};
}

// 9. Deflated wealth identity in arbitrage-free constant markets.
Outcome identity_residuals() {
  oracle::Rng rng(901);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int d = rng.integer(1, 3);
    const int n = rng.integer(1, d);
    Eigen::MatrixXd sigma = random_matrix(rng, n, d) * 0.15;
    for (int i = 0; i < n; ++i) sigma(i, i) += 0.2;
    const Eigen::VectorXd theta = random_matrix(rng, d, 1) * 0.3;
    const double r = rng.uniform(0.0, 0.06);
    Eigen::VectorXd prices(n);
    for (int i = 0; i < n; ++i) prices[i] = rng.uniform(20.0, 150.0);
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(n, r) + sigma * theta;
    auto m = ParametricMarket::constant(prices, r, b, Eigen::VectorXd::Zero(n), sigma);
    const auto s = simulate(m, build_time_grid(1.0, 25), 2000, 910 + t);
    const auto defl = deflator_paths(s);
    const double a = rng.uniform(-50.0, 50.0), c = rng.uniform(-2.0, 2.0);
    auto pf = PortfolioProcess::zeros(s.paths(), s.points(), s.assets());
    for (std::size_t p = 0; p < s.paths(); ++p)
      for (std::size_t k = 0; k < s.points(); ++k)
        for (std::size_t i = 0; i < s.assets(); ++i)
          pf.stock(p, k, i) = a * std::tanh(c * (s.prices(p, k, i) / prices[i] - 1.0) + 0.2 * i);
    auto income = IncomeStream::none(s.paths(), s.points());
    const double rate = rng.uniform(-1.0, 1.0);
    for (double& v : income.rate.data()) v = rate;
    auto w = wealth_paths(rng.uniform(0.0, 100.0), pf, income, s);
    const auto res = deflated_wealth_identity_residual(w, income, defl, pf, s);
    worst = std::max(worst, res.max_relative);
  }
  return {worst <= 1e-6, "max residual / scale over 20 portfolios = " + g(worst)};
}

#ifdef TAMEVAL_CLI_PATH
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" + TAMEVAL_CLI_PATH + "' " + args +
                          " > stdout.txt 2> stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10. Byte-identical CLI output for 1 and many workers.
Outcome determinism() {
  const fs::path configs = TAMEVAL_CONFIG_DIR;
  const std::size_t many = std::max<std::size_t>(4, std::thread::hardware_concurrency());
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"simulate", "black_scholes"},         {"simulate", "bessel_demo"},
      {"check-arbitrage", "failing_market"}, {"price-european", "black_scholes"},
      {"price-american", "black_scholes"},   {"price-american", "american_put_lattice"},
      {"hedge", "black_scholes"},            {"hedge", "degenerate"},
      {"oracle", "black_scholes"}};
  const fs::path root = fs::temp_directory_path() / ("tameval_acceptance_" + std::to_string(::getpid()));
  std::size_t files = 0;
  std::vector<std::string> mismatches;
  for (const auto& [command, config] : runs) {
    int codes[2];
    fs::path dirs[2];
    for (int w = 0; w < 2; ++w) {
      dirs[w] = root / (command + "_" + config + (w ? "_many" : "_one"));
      fs::remove_all(dirs[w]);
      fs::create_directories(dirs[w]);
      codes[w] = run_cli(dirs[w], command + " --config '" + (configs / (config + ".json")).string() +
                                      "' --paths 3000 --out out --threads " +
                                      std::to_string(w ? many : 1));
    }
    const std::string label = command + " " + config;
    if (codes[0] != codes[1] || codes[0] >= 2) {
      mismatches.push_back(label + " exit " + std::to_string(codes[0]) + "/" + std::to_string(codes[1]));
      continue;
    }
    std::vector<fs::path> rel = {"stdout.txt"};
    for (const auto& e : fs::directory_iterator(dirs[0] / "out")) rel.push_back(fs::path("out") / e.path().filename());
    for (const auto& f : rel) {
      ++files;
      if (!fs::exists(dirs[1] / f) || slurp(dirs[0] / f) != slurp(dirs[1] / f)) {
        mismatches.push_back(label + " " + f.string());
      }
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(runs.size()) + " runs, " + std::to_string(files) +
                       " files compared at 1 vs " + std::to_string(many) + " workers";
  for (const auto& m : mismatches) detail += "; differs: " + m;
  return {mismatches.empty() && files > runs.size(), detail};
}
#else
Outcome determinism() { return {false, "command-line tool not built"}; }
#endif

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "projection exactness", 5, projection_exactness},
      {2, "arbitrage characterization", 30, arbitrage_characterization},
      {3, "Black-Scholes European call and parity", 60, black_scholes_european},
      {4, "strict local martingale deflator", 120, strict_local_martingale},
      {5, "stopping-time combination, exhaustive", 10, combination_exhaustive},
      {6, "tournament equals backward induction", 30, tournament_equals_snell},
      {7, "American put bracket", 180, american_put_bracket},
      {8, "degenerate-volatility completeness", 60, degenerate_completeness},
      {9, "deflated wealth identity", 30, identity_residuals},
      {10, "determinism across worker counts", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_s == 0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::string timing = fmt("%.2f s", secs);
    if (c.limit_s > 0) timing += fmt(", limit %.0f s", c.limit_s);
    std::printf("[%s] %2d %s: %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
