#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "tameval/american.hpp"
#include "tameval/arbitrage.hpp"
#include "tameval/csv.hpp"
#include "tameval/deflator.hpp"
#include "tameval/european.hpp"
#include "tameval/lattice.hpp"
#include "tameval/scenario.hpp"

namespace tameval::cli {
namespace {

// Lattice path spaces hold 2^n paths.
constexpr std::size_t kMaxPathSpaceSteps = 16;

struct Context {
  const RunConfig& rc;
  const std::optional<std::string>& filter;
  std::ostream& err;
  Json report = Json::object();
  int code = kExitOk;

  std::filesystem::path file(const std::string& name) const { return rc.output.dir / name; }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(file(name), std::ios::binary);
    if (!f) throw ConfigError("output.dir: cannot write " + file(name).string());
    return f;
  }

  void finding(const std::string& message) {
    err << "finding: " << message << "\n";
    report["findings"].push_back(message);
    code = kExitFinding;
  }

  std::vector<const ClaimConfig*> claims(const std::string& type) const {
    std::vector<const ClaimConfig*> out;
    for (const auto& c : rc.claims) {
      if (filter && c.id != *filter) continue;
      if (type.empty() || c.type == type) out.push_back(&c);
    }
    if (filter && out.empty()) {
      throw ConfigError("--claim: no " + (type.empty() ? std::string() : type + " ") +
                        "claim with id '" + *filter + "'");
    }
    if (out.empty()) throw ConfigError("claims: this command needs at least one " + (type.empty() ? std::string() : type + " ") + "claim");
    return out;
  }
};

std::string file_stem(const std::string& id) {
  std::string s;
  for (char ch : id) {
    s += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
  }
  return s;
}

const LatticeConfig& lattice_config(const RunConfig& rc) {
  if (!rc.lattice) {
    throw ConfigError("lattice: section required; the market is not a one-asset "
                      "constant-coefficient model to take defaults from");
  }
  return *rc.lattice;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const MeanEstimate& m) {
  return {{"estimate", number(m.estimate)},
          {"std_error", number(m.std_error)},
          {"ci_low", number(m.ci_low)},
          {"ci_high", number(m.ci_high)}};
}

Json to_json(const ValuationReport& r) {
  return {{"estimate", number(r.estimate)},       {"std_error", number(r.std_error)},
          {"ci_low", number(r.ci_low)},           {"ci_high", number(r.ci_high)},
          {"n_paths", r.n_paths},                 {"second_moment", number(r.second_moment)},
          {"min_deflated", number(r.min_deflated)}, {"warnings", r.warnings}};
}

Json to_json(const IntegrabilityReport& r) {
  return {{"theta_sq_integral_max", number(r.max)},
          {"mean", number(r.mean)},
          {"median", number(r.median)},
          {"q90", number(r.q90)},
          {"q99", number(r.q99)},
          {"cap", number(r.cap)},
          {"all_finite", r.all_finite},
          {"flagged_count", r.flagged_count},
          {"flagged_paths", r.flagged_paths}};
}

Json to_json(const AttainabilityReport& r) {
  return {{"attainable", r.attainable},
          {"rank_condition", r.rank_condition},
          {"complement_condition", r.complement_condition},
          {"support_size", r.support_size},
          {"min_rank", r.min_rank},
          {"max_rank", r.max_rank},
          {"max_cross_alignment", number(r.max_cross_alignment)},
          {"rate_measurability_warning", r.rate_measurability_warning},
          {"warnings", r.warnings}};
}

Json support_json(const std::vector<std::size_t>& support) {
  Json j = Json::array();
  for (auto i : support) j.push_back(i + 1);
  return j;
}

struct Market {
  ScenarioSet s;
  DeflatorSet d;
};

Market simulate_market(const RunConfig& rc) {
  SimulationOptions opts;
  opts.integrability_cap = rc.tolerances.integrability_cap;
  Market m;
  m.s = simulate(rc.market, rc.grid, rc.n_paths, rc.seed, opts);
  m.d = deflator_paths(m.s, DeflatorOptions{rc.tolerances.rank});
  return m;
}

void cmd_simulate(Context& ctx) {
  const auto m = simulate_market(ctx.rc);
  const auto integrability = integrability_diagnostic(m.d, ctx.rc.tolerances.integrability_cap);
  const auto arb = detect_state_arbitrage(m.s, m.d, ctx.rc.tolerances.arbitrage);
  ctx.report["paths"] = m.s.paths();
  ctx.report["points"] = m.s.points();
  ctx.report["assets"] = m.s.assets();
  ctx.report["drivers"] = m.s.drivers();
  ctx.report["min_rank"] = m.d.min_rank;
  ctx.report["terminal_density_mean"] = to_json(estimate_ez0(m.d));
  ctx.report["integrability"] = to_json(integrability);
  ctx.report["state_arbitrage_free"] = arb.is_state_arbitrage_free;
  ctx.report["max_kernel_residual"] = number(arb.max_residual_norm);
  {
    auto f = ctx.open("scenarios.csv");
    write_scenarios_csv(f, m.s, ctx.rc.output.max_csv_paths);
  }
  auto f = ctx.open("deflators.csv");
  write_deflators_csv(f, m.s, m.d, ctx.rc.output.max_csv_paths);
}

void cmd_check_arbitrage(Context& ctx) {
  const auto m = simulate_market(ctx.rc);
  const auto arb = detect_state_arbitrage(m.s, m.d, ctx.rc.tolerances.arbitrage);
  Json offending = Json::array();
  for (const auto& [p, k] : arb.offending) offending.push_back({{"path", p}, {"point", k}});
  ctx.report["state_arbitrage_free"] = arb.is_state_arbitrage_free;
  ctx.report["tolerance"] = arb.tolerance;
  ctx.report["max_kernel_residual"] = number(arb.max_residual_norm);
  ctx.report["offending_count"] = arb.offending_count;
  ctx.report["offending"] = offending;
  if (arb.is_state_arbitrage_free) return;

  const auto pf = construct_arbitrage_portfolio(m.s, m.d, ctx.rc.tolerances.arbitrage);
  const PathArray gain = simulate_gain(pf, m.s);
  const std::size_t last = m.s.points() - 1;
  std::vector<double> terminal(m.s.paths());
  double min_gain = 0.0;
  std::size_t positive = 0;
  for (std::size_t p = 0; p < m.s.paths(); ++p) {
    terminal[p] = gain(p, last);
    positive += terminal[p] > 0.0;
    for (std::size_t k = 0; k < m.s.points(); ++k) min_gain = std::min(min_gain, gain(p, k));
  }
  ctx.report["arbitrage_portfolio"] = {
      {"terminal_gain", to_json(mean_estimate(terminal))},
      {"min_gain", number(min_gain)},
      {"fraction_positive", static_cast<double>(positive) / static_cast<double>(m.s.paths())}};
  auto f = ctx.open("arbitrage_gain.csv");
  write_path_array_csv(f, m.s.grid, gain, "gain", ctx.rc.output.max_csv_paths);
  ctx.finding("state arbitrage: kernel residual |p| up to " +
              format_double(arb.max_residual_norm) + " at " +
              std::to_string(arb.offending_count) + " (path, point) pairs");
}

void cmd_price_european(Context& ctx) {
  const auto claims = ctx.claims("european");
  const auto m = simulate_market(ctx.rc);
  ctx.report["integrability"] =
      to_json(integrability_diagnostic(m.d, ctx.rc.tolerances.integrability_cap));
  Json out = Json::array();
  for (const auto* c : claims) {
    Json j = {{"id", c->id}};
    j.update(to_json(price_secc(c->european, m.s, m.d)));
    out.push_back(j);
  }
  ctx.report["claims"] = out;
}

void cmd_hedge(Context& ctx) {
  std::vector<const ClaimConfig*> claims;
  for (const auto* c : ctx.claims("european")) {
    if (ctx.filter || c->european.hedge) claims.push_back(c);
  }
  if (claims.empty()) throw ConfigError("claims: no european claim has \"hedge\": true");
  const auto m = simulate_market(ctx.rc);
  HedgeOptions opts;
  opts.degree = ctx.rc.estimator.degree;
  opts.replication_tol = ctx.rc.tolerances.replication;
  opts.rank_tol = ctx.rc.tolerances.rank;
  Json out = Json::array();
  for (const auto* c : claims) {
    const auto& claim = c->european;
    Json j = {{"id", c->id}, {"driver_support", support_json(claim.driver_support)}};
    const auto att = attainability_check(m.s, claim.driver_support,
                                         ctx.rc.tolerances.attainability, ctx.rc.tolerances.rank);
    j["attainability"] = to_json(att);
    if (!att.attainable) {
      if (!att.rank_condition) {
        ctx.finding("claim '" + c->id + "' is not attainable: rank condition fails, rank of "
                    "the support's volatility columns is " + std::to_string(att.min_rank) +
                    " < " + std::to_string(att.support_size));
      } else {
        ctx.finding("claim '" + c->id + "' is not attainable: the complementary volatility "
                    "columns do not span the orthogonal complement of the support's range");
      }
      out.push_back(j);
      continue;
    }
    const HedgeResult h = hedge_claim(claim, m.s, m.d, opts);
    j["initial_wealth"] = number(h.initial_wealth);
    j["price"] = to_json(price_secc(claim, m.s, m.d));
    j["replicable"] = h.replicable;
    j["max_replication_residual"] = number(h.max_replication_residual);
    j["median_replication_residual"] = number(h.median_replication_residual);
    j["flagged_points"] = h.flagged_points;
    j["terminal_rmse"] = number(h.terminal_rmse);
    j["terminal_max_error"] = number(h.terminal_max_error);
    j["warnings"] = h.warnings;
    const std::string name = "hedge_" + file_stem(c->id) + ".csv";
    j["hedge_path_csv"] = name;
    auto f = ctx.open(name);
    write_hedge_path_csv(f, m.s, h, ctx.rc.output.hedge_path);
    if (!h.replicable) {
      ctx.finding("claim '" + c->id + "': replication residual above tolerance at " +
                  std::to_string(h.flagged_points) + " points");
    }
    out.push_back(j);
  }
  ctx.report["claims"] = out;
}

Json trace_json(const ImprovementTrace& t) {
  return {{"final", to_json(t.final)},
          {"combinations", t.values.size()},
          {"running_max_bound", number(t.running_max_bound)},
          {"near_bound", t.near_bound},
          {"decreases", t.decreases}};
}

NodeFunction optional_node_function(const Lattice& lat, const Payoff& p) {
  return p.is_zero() ? NodeFunction{} : node_function(lat, p);
}

void cmd_price_american(Context& ctx) {
  const auto claims = ctx.claims("american");
  const auto& est = ctx.rc.estimator;
  Json out = Json::array();
  if (est.kind == "lattice") {
    const auto& lc = lattice_config(ctx.rc);
    const std::size_t steps = lc.n_steps;
    if (steps > kMaxPathSpaceSteps) {
      throw ConfigError("lattice.n_steps: the lattice estimator enumerates 2^n paths; use at "
                        "most " + std::to_string(kMaxPathSpaceSteps) + " steps");
    }
    const Lattice lat = lc.build();
    for (const auto* c : claims) {
      const auto& claim = c->american;
      const auto lp = lattice_paths(lat, node_function(lat, claim.settlement),
                                    optional_node_function(lat, claim.rate));
      PrefixEstimator pe(steps, lp.payoff.weights);
      const auto trace = improve_to_value(fixed_date_candidates(lp.payoff, claim.candidates),
                                          lp.payoff, pe, claim.order);
      const auto oracle = snell_lattice_oracle(lat, claim);
      const std::string name = "trace_" + file_stem(c->id) + ".csv";
      auto f = ctx.open(name);
      write_trace_csv(f, trace);
      out.push_back({{"id", c->id},
                     {"estimator", "lattice"},
                     {"estimate", number(trace.final.estimate)},
                     {"backward_induction_value", number(oracle.value)},
                     {"european_value", number(oracle.european_value)},
                     {"trace", trace_json(trace)},
                     {"trace_csv", name}});
    }
    ctx.report["claims"] = out;
    return;
  }

  const auto m = simulate_market(ctx.rc);
  AmericanOptions opts;
  opts.degree = est.degree;
  opts.itm_only = est.itm_only;
  for (const auto* c : claims) {
    const auto r = price_sacc(c->american, m.s, m.d, opts);
    const std::string stem = file_stem(c->id);
    {
      auto f = ctx.open("trace_" + stem + ".csv");
      write_trace_csv(f, r.trace);
    }
    auto f = ctx.open("exercise_region_" + stem + ".csv");
    write_exercise_region_csv(f, m.s.grid, r.exercise_region);
    Json j = {{"id", c->id}, {"estimator", "regression"}};
    j.update(to_json(r.report));
    j["european_value"] = number(r.european_value);
    j["european_std_error"] = number(r.european_std_error);
    j["trace"] = trace_json(r.trace);
    j["trace_csv"] = "trace_" + stem + ".csv";
    j["exercise_region_csv"] = "exercise_region_" + stem + ".csv";
    out.push_back(j);
  }
  ctx.report["claims"] = out;
}

void cmd_oracle(Context& ctx) {
  const auto claims = ctx.claims("");
  const Lattice lat = lattice_config(ctx.rc).build();
  ctx.report["lattice"] = {{"up", lat.up()},
                           {"down", lat.down()},
                           {"pricing_up", lat.pricing_up()},
                           {"physical_up", lat.physical_up()},
                           {"n_steps", lat.steps()}};
  Json out = Json::array();
  for (const auto* c : claims) {
    AmericanClaim claim = c->american;
    if (c->type == "european") {
      claim.id = c->id;
      claim.settlement = c->european.payoff;
      claim.rate = c->european.rate;
      if (c->european.expiry.kind != ExpiryKind::kHorizon) {
        throw ConfigError("claims: '" + c->id + "' has a hitting expiry; the lattice oracle "
                          "handles fixed horizons only");
      }
    }
    const auto r = snell_lattice_oracle(lat, claim);
    Json j = {{"id", c->id}, {"type", c->type}, {"european_value", number(r.european_value)}};
    if (c->type == "american") {
      j["american_value"] = number(r.value);
      const std::string name = "oracle_exercise_" + file_stem(c->id) + ".csv";
      auto f = ctx.open(name);
      CsvWriter w(f);
      w.header({"step", "time", "exercise_nodes", "min_price", "max_price"});
      for (std::size_t k = 0; k <= lat.steps(); ++k) {
        std::size_t count = 0;
        double lo = std::numeric_limits<double>::quiet_NaN(), hi = lo;
        for (std::size_t jn = 0; jn <= k; ++jn) {
          if (!r.exercise[k][jn]) continue;
          const double price = lat.price(k, jn);
          lo = count ? std::min(lo, price) : price;
          hi = count ? std::max(hi, price) : price;
          ++count;
        }
        w.field(k).field(lat.time(k)).field(count).field(lo).field(hi).end_row();
      }
      j["exercise_csv"] = name;
    }
    out.push_back(j);
  }
  ctx.report["claims"] = out;
}

const std::map<std::string, std::function<void(Context&)>>& commands() {
  static const std::map<std::string, std::function<void(Context&)>> table = {
      {"simulate", cmd_simulate},
      {"check-arbitrage", cmd_check_arbitrage},
      {"price-european", cmd_price_european},
      {"price-american", cmd_price_american},
      {"hedge", cmd_hedge},
      {"oracle", cmd_oracle},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate",       "check-arbitrage",
                                                 "price-european", "price-american",
                                                 "hedge",          "oracle"};
  return names;
}

int run_command(const std::string& name, const RunConfig& rc,
                const std::optional<std::string>& claim_filter, std::ostream& out,
                std::ostream& err) {
  const auto it = commands().find(name);
  if (it == commands().end()) {
    err << "error: unknown command '" << name << "'\n";
    return kExitValidation;
  }
  Context ctx{rc, claim_filter, err};
  ctx.report["command"] = name;
  ctx.report["findings"] = Json::array();
  try {
    std::filesystem::create_directories(rc.output.dir);
    {
      auto f = ctx.open("resolved_config.json");
      f << rc.resolved.dump(2) << "\n";
    }
    it->second(ctx);
  } catch (const SimulationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  Json doc = {{"config", rc.resolved}, {"report", ctx.report}};
  const std::string text = doc.dump(2);
  try {
    auto f = ctx.open("report.json");
    f << ctx.report.dump(2) << "\n";
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  out << text << "\n";
  return ctx.code;
}

}  // namespace tameval::cli
