#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

extern char** environ;

namespace tameval::cli {
namespace {

constexpr const char* kEnvPrefix = "TAMEVAL_";

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field + ": " + message);
}

// A view of one JSON object that materializes defaults as they are read,
// so the document doubles as the resolved-config echo.
class Node {
 public:
  Node(Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(where(), "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  std::string where() const { return path_.empty() ? "config" : path_; }
  bool has(const std::string& key) const {
    return j_.contains(key) && !j_[key].is_null();
  }
  Json& raw() { return j_; }

  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items()) {
      if (!allowed.count(k)) fail(field(k), "unknown field");
    }
  }

  double number(const std::string& key, std::optional<double> fallback = {}) {
    if (!has(key)) {
      if (!fallback) fail(field(key), "required number is missing");
      j_[key] = *fallback;
      return *fallback;
    }
    const Json& v = j_[key];
    if (!v.is_number()) fail(field(key), "expected a number, got " + v.dump());
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field(key), "must be finite");
    return x;
  }

  double positive(const std::string& key, std::optional<double> fallback = {}) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) fail(field(key), "must be positive");
    return x;
  }

  std::uint64_t integer(const std::string& key, std::optional<std::uint64_t> fallback,
                        std::uint64_t min = 0) {
    if (!has(key)) {
      if (!fallback) fail(field(key), "required integer is missing");
      j_[key] = *fallback;
      return *fallback;
    }
    const Json& v = j_[key];
    if (!v.is_number_unsigned()) {
      fail(field(key), "expected a non-negative integer, got " + v.dump());
    }
    const auto x = v.get<std::uint64_t>();
    if (x < min) fail(field(key), "must be at least " + std::to_string(min));
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) {
      j_[key] = fallback;
      return fallback;
    }
    if (!j_[key].is_boolean()) fail(field(key), "expected true or false");
    return j_[key].get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = {}) {
    if (!has(key)) {
      if (!fallback) fail(field(key), "required string is missing");
      j_[key] = *fallback;
      return *fallback;
    }
    if (!j_[key].is_string()) fail(field(key), "expected a string");
    return j_[key].get<std::string>();
  }

  std::vector<double> numbers(const std::string& key,
                              std::optional<std::vector<double>> fallback = {}) {
    if (!has(key)) {
      if (!fallback) fail(field(key), "required array is missing");
      j_[key] = *fallback;
      return *fallback;
    }
    const Json& v = j_[key];
    if (!v.is_array()) fail(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        fail(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
      if (!std::isfinite(out.back())) {
        fail(field(key) + "[" + std::to_string(i) + "]", "must be finite");
      }
    }
    return out;
  }

  Eigen::MatrixXd matrix(const std::string& key, std::size_t rows, std::size_t cols) {
    if (!has(key)) fail(field(key), "required matrix is missing");
    const Json& v = j_[key];
    if (!v.is_array() || v.size() != rows) {
      fail(field(key), "expected " + std::to_string(rows) + " rows");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      const std::string row = field(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_array() || v[i].size() != cols) {
        fail(row, "expected " + std::to_string(cols) + " entries");
      }
      for (std::size_t j = 0; j < cols; ++j) {
        if (!v[i][j].is_number()) fail(row + "[" + std::to_string(j) + "]", "expected a number");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
      }
    }
    if (!m.allFinite()) fail(field(key), "entries must be finite");
    return m;
  }

  Node object(const std::string& key) {
    if (!has(key)) j_[key] = Json::object();
    return Node(j_[key], field(key));
  }

 private:
  Json& j_;
  std::string path_;
};

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> sized(Node& n, const std::string& key, std::size_t size,
                          std::optional<std::vector<double>> fallback = {}) {
  auto v = n.numbers(key, std::move(fallback));
  if (v.size() != size) {
    fail(n.field(key), "expected " + std::to_string(size) + " entries, got " +
                           std::to_string(v.size()));
  }
  return v;
}

CoefficientPiece read_piece(Node& n, std::size_t assets, std::size_t drivers,
                            double until) {
  CoefficientPiece piece;
  piece.until = until;
  piece.rate = n.number("rate", 0.0);
  piece.mean_return = to_vector(sized(n, "mean_return", assets));
  piece.dividend = to_vector(sized(n, "dividend", assets, std::vector<double>(assets, 0.0)));
  piece.volatility = n.matrix("volatility", assets, drivers);
  return piece;
}

std::shared_ptr<const MarketModel> read_market(Node m) {
  m.only({"assets", "drivers", "scheme", "initial_prices", "coefficients", "aux"});
  const auto prices = m.numbers("initial_prices");
  if (prices.empty()) fail(m.field("initial_prices"), "need at least one asset");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0)) {
      fail(m.field("initial_prices") + "[" + std::to_string(i) + "]", "must be positive");
    }
  }
  const std::size_t assets = m.integer("assets", prices.size(), 1);
  if (assets != prices.size()) {
    fail(m.field("assets"), "disagrees with initial_prices (" +
                                std::to_string(prices.size()) + " entries)");
  }
  Node c = m.object("coefficients");
  const std::string family = c.text("family", "constant");

  if (family == "bessel-deflator-demo") {
    c.only({"family", "rate", "volatility", "initial_radius"});
    const std::size_t drivers = m.integer("drivers", 1, 1);
    if (assets != 1 || drivers != 1) {
      fail(c.field("family"), "bessel-deflator-demo needs one asset and one driver");
    }
    const std::string scheme = m.text("scheme", "euler-log");
    if (m.has("aux")) fail(m.field("aux"), "not available for bessel-deflator-demo");
    m.raw()["aux"] = nullptr;
    try {
      return std::make_shared<BesselDeflatorMarket>(
          prices[0], c.number("rate", 0.0), c.positive("volatility"),
          c.positive("initial_radius", 1.0), parse_scheme(scheme));
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      fail(m.where(), e.what());
    }
  }

  std::size_t drivers = 0;
  std::vector<CoefficientPiece> pieces;
  if (family == "constant") {
    c.only({"family", "rate", "mean_return", "dividend", "volatility"});
    if (!c.has("volatility") || !c.raw()["volatility"].is_array() ||
        c.raw()["volatility"].empty() || !c.raw()["volatility"][0].is_array()) {
      fail(c.field("volatility"), "expected an array of rows");
    }
    drivers = m.integer("drivers", c.raw()["volatility"][0].size(), 1);
    pieces.push_back(read_piece(c, assets, drivers, std::numeric_limits<double>::infinity()));
  } else if (family == "piecewise-constant") {
    c.only({"family", "pieces"});
    if (!c.has("pieces") || !c.raw()["pieces"].is_array() || c.raw()["pieces"].empty()) {
      fail(c.field("pieces"), "expected a non-empty array");
    }
    Json& arr = c.raw()["pieces"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Node p(arr[i], c.field("pieces") + "[" + std::to_string(i) + "]");
      p.only({"until", "rate", "mean_return", "dividend", "volatility"});
      if (i == 0) {
        if (!p.has("volatility") || !p.raw()["volatility"].is_array() ||
            p.raw()["volatility"].empty() || !p.raw()["volatility"][0].is_array()) {
          fail(p.field("volatility"), "expected an array of rows");
        }
        drivers = m.integer("drivers", p.raw()["volatility"][0].size(), 1);
      }
      const bool last = i + 1 == arr.size();
      double until = std::numeric_limits<double>::infinity();
      if (!last) {
        until = p.positive("until");
      } else if (p.has("until")) {
        fail(p.field("until"), "the last piece runs to the horizon; omit it");
      }
      pieces.push_back(read_piece(p, assets, drivers, until));
    }
  } else {
    fail(c.field("family"), "unknown family '" + family +
                                "' (expected constant, piecewise-constant or "
                                "bessel-deflator-demo)");
  }

  const std::string scheme_name =
      m.text("scheme", pieces.size() == 1 ? "log-exact-constant" : "euler-log");
  Scheme scheme;
  try {
    scheme = parse_scheme(scheme_name);
  } catch (const ValidationError& e) {
    fail(m.field("scheme"), e.what());
  }

  std::optional<BrownianFactor> factor;
  if (m.has("aux")) {
    Node a = m.object("aux");
    a.only({"driver", "initial", "drift", "vol"});
    BrownianFactor f;
    const auto driver = a.integer("driver", 1, 1);
    if (driver > drivers) {
      fail(a.field("driver"), "must be between 1 and " + std::to_string(drivers));
    }
    f.driver = driver - 1;
    f.initial = a.number("initial", 0.0);
    f.drift = a.number("drift", 0.0);
    f.vol = a.number("vol", 1.0);
    factor = f;
  } else {
    m.raw()["aux"] = nullptr;
  }
  try {
    return std::make_shared<ParametricMarket>(to_vector(prices), std::move(pieces), scheme,
                                              factor);
  } catch (const ValidationError& e) {
    fail(m.where(), e.what());
  }
}

Payoff read_payoff(Node p, std::size_t assets, bool zero_default) {
  p.only({"family", "strike", "scale", "asset", "knots", "values"});
  Payoff out;
  const std::string family = p.text("family", "constant");
  try {
    out.family = parse_payoff_family(family);
  } catch (const ValidationError& e) {
    fail(p.field("family"), e.what());
  }
  if (out.family == PayoffFamily::kCustom) {
    fail(p.field("family"), "custom payoffs are only available through the library");
  }
  out.strike = p.number("strike", 0.0);
  out.scale = p.number("scale", zero_default && family == "constant" ? 0.0 : 1.0);
  const auto asset = p.integer("asset", 1, 1);
  if (asset > assets) fail(p.field("asset"), "must be between 1 and " + std::to_string(assets));
  out.asset = asset - 1;
  if (out.family == PayoffFamily::kPiecewiseLinear) {
    out.knots = p.numbers("knots");
    out.values = p.numbers("values");
  }
  try {
    out.validate(assets);
  } catch (const ValidationError& e) {
    fail(p.where(), e.what());
  }
  return out;
}

ExpiryRule read_expiry(Node e, std::size_t assets, double horizon) {
  e.only({"kind", "level", "asset", "on_aux", "horizon"});
  ExpiryRule r;
  try {
    r.kind = parse_expiry_kind(e.text("kind", "horizon"));
  } catch (const ValidationError& ex) {
    fail(e.field("kind"), ex.what());
  }
  r.horizon = e.positive("horizon", horizon);
  if (r.horizon > horizon * (1.0 + 1e-12)) {
    fail(e.field("horizon"), "exceeds the grid horizon");
  }
  if (r.kind != ExpiryKind::kHorizon) {
    r.level = e.number("level");
    r.on_aux = e.boolean("on_aux", false);
    const auto asset = e.integer("asset", 1, 1);
    if (asset > assets) fail(e.field("asset"), "must be between 1 and " + std::to_string(assets));
    r.asset = asset - 1;
  }
  return r;
}

std::vector<std::size_t> read_support(Node& c, std::size_t drivers) {
  if (!c.has("driver_support")) {
    Json all = Json::array();
    for (std::size_t i = 1; i <= drivers; ++i) all.push_back(i);
    c.raw()["driver_support"] = all;
  }
  const Json& v = c.raw()["driver_support"];
  if (!v.is_array()) fail(c.field("driver_support"), "expected an array of driver numbers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string f = c.field("driver_support") + "[" + std::to_string(i) + "]";
    if (!v[i].is_number_integer()) fail(f, "expected an integer");
    const auto x = v[i].get<std::int64_t>();
    if (x < 1 || static_cast<std::size_t>(x) > drivers) {
      fail(f, "driver " + std::to_string(x) + " is outside 1.." + std::to_string(drivers));
    }
    out.push_back(static_cast<std::size_t>(x - 1));
  }
  return out;
}

ClaimConfig read_claim(Node c, const MarketModel& market, const TimeGrid& grid) {
  ClaimConfig out;
  out.id = c.text("id");
  out.type = c.text("type", "european");
  const std::size_t assets = market.assets();
  if (out.type == "european") {
    c.only({"id", "type", "payoff", "rate", "expiry", "driver_support", "hedge"});
    auto& e = out.european;
    e.id = out.id;
    e.payoff = read_payoff(c.object("payoff"), assets, true);
    e.rate = read_payoff(c.object("rate"), assets, true);
    e.expiry = read_expiry(c.object("expiry"), assets, grid.horizon());
    e.driver_support = read_support(c, market.drivers());
    e.hedge = c.boolean("hedge", false);
  } else if (out.type == "american") {
    c.only({"id", "type", "settlement", "rate", "horizon", "driver_support", "order",
            "candidates"});
    auto& a = out.american;
    a.id = out.id;
    a.settlement = read_payoff(c.object("settlement"), assets, true);
    a.rate = read_payoff(c.object("rate"), assets, true);
    a.horizon = read_expiry(c.object("horizon"), assets, grid.horizon());
    a.driver_support = read_support(c, market.drivers());
    try {
      a.order = parse_tournament_order(c.text("order", "latest-first"));
    } catch (const ValidationError& e) {
      fail(c.field("order"), e.what());
    }
    if (!c.has("candidates")) c.raw()["candidates"] = Json::array();
    const Json& v = c.raw()["candidates"];
    if (!v.is_array()) fail(c.field("candidates"), "expected an array of grid indices");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned() ||
          v[i].get<std::size_t>() >= grid.points()) {
        fail(c.field("candidates") + "[" + std::to_string(i) + "]",
             "expected a grid index below " + std::to_string(grid.points()));
      }
      a.candidates.push_back(v[i].get<std::size_t>());
    }
  } else {
    fail(c.field("type"), "expected european or american, got '" + out.type + "'");
  }
  return out;
}

// Merges claim files into the document: {"id": ..., "file": "x.json"}
// takes the file's fields, with inline fields winning.
void inline_claim_files(Json& claims, const std::filesystem::path& base_dir) {
  for (std::size_t i = 0; i < claims.size(); ++i) {
    Json& c = claims[i];
    if (!c.is_object() || !c.contains("file")) continue;
    const std::string where = "claims[" + std::to_string(i) + "].file";
    if (!c["file"].is_string()) fail(where, "expected a path");
    Json merged;
    try {
      merged = load_json_file(base_dir / c["file"].get<std::string>());
    } catch (const ConfigError& e) {
      fail(where, e.what());
    }
    if (!merged.is_object()) fail(where, "claim file must hold an object");
    merged.erase("file");
    for (const auto& [k, v] : c.items()) {
      if (k != "file") merged[k] = v;
    }
    c = std::move(merged);
  }
}

std::optional<LatticeConfig> read_lattice(Json& root, const MarketModel& market,
                                          const TimeGrid& grid) {
  const bool given = root.contains("lattice") && !root["lattice"].is_null();
  const bool derivable =
      market.assets() == 1 &&
      (dynamic_cast<const BesselDeflatorMarket*>(&market) ||
       (dynamic_cast<const ParametricMarket*>(&market) &&
        dynamic_cast<const ParametricMarket&>(market).pieces().size() == 1));
  if (!given && !derivable) {
    root["lattice"] = nullptr;
    return std::nullopt;
  }
  if (!given) root["lattice"] = Json::object();
  Node l(root["lattice"], "lattice");
  l.only({"spot", "rate", "volatility", "dividend", "horizon", "n_steps", "physical_up"});
  LatticeConfig out;
  // Defaults come from a one-asset constant market when there is one.
  std::optional<double> spot, rate, vol, div;
  if (market.assets() == 1) {
    spot = market.initial_prices()[0];
    if (const auto* p = dynamic_cast<const ParametricMarket*>(&market);
        p && p->pieces().size() == 1) {
      rate = p->pieces()[0].rate;
      vol = p->pieces()[0].volatility.row(0).norm();
      div = p->pieces()[0].dividend[0];
    } else if (const auto* b = dynamic_cast<const BesselDeflatorMarket*>(&market)) {
      rate = b->rate();
      vol = b->vol();
      div = 0.0;
    }
  }
  out.spot = l.positive("spot", spot);
  out.rate = l.number("rate", rate);
  out.volatility = l.positive("volatility", vol);
  out.dividend = l.number("dividend", div ? *div : 0.0);
  out.horizon = l.positive("horizon", grid.horizon());
  out.n_steps = l.integer("n_steps", 1000, 1);
  if (l.has("physical_up")) {
    out.physical_up = l.number("physical_up");
    if (!(out.physical_up > 0.0 && out.physical_up < 1.0)) {
      fail(l.field("physical_up"), "must lie in (0, 1)");
    }
  } else {
    l.raw()["physical_up"] = nullptr;
  }
  return out;
}

Json parse_env_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return text;
  }
}

}  // namespace

Lattice LatticeConfig::build() const { return build(n_steps); }

Lattice LatticeConfig::build(std::size_t steps) const {
  try {
    return Lattice::crr(spot, rate, volatility, horizon, steps, dividend, physical_up);
  } catch (const ValidationError& e) {
    fail("lattice", e.what());
  }
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

std::map<std::string, std::string> environment_overrides() {
  std::map<std::string, std::string> out;
  const std::string prefix = kEnvPrefix;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry = *e;
    const auto eq = entry.find('=');
    if (eq == std::string::npos || entry.compare(0, prefix.size(), prefix) != 0) continue;
    out[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return out;
}

void apply_env_overrides(Json& config, const std::map<std::string, std::string>& env) {
  const std::string prefix = kEnvPrefix;
  for (const auto& [name, value] : env) {
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    std::string key = name.substr(prefix.size());
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    std::vector<std::string> parts;
    for (std::size_t start = 0;;) {
      const auto sep = key.find("__", start);
      parts.push_back(key.substr(start, sep - start));
      if (sep == std::string::npos) break;
      start = sep + 2;
    }
    Json* node = &config;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::string& part = parts[i];
      if (part.empty()) throw ConfigError(name + ": empty key segment");
      const bool last = i + 1 == parts.size();
      if (node->is_array()) {
        if (!std::all_of(part.begin(), part.end(), ::isdigit)) {
          throw ConfigError(name + ": '" + part + "' does not index an array");
        }
        const std::size_t idx = std::stoul(part);
        if (idx >= node->size()) throw ConfigError(name + ": index " + part + " out of range");
        node = &(*node)[idx];
      } else {
        if (!node->is_object() && !node->is_null()) {
          throw ConfigError(name + ": cannot descend into a non-object");
        }
        node = &(*node)[part];
      }
      if (last) *node = parse_env_value(value);
    }
  }
}

RunConfig resolve_config(Json raw, const std::filesystem::path& base_dir) {
  RunConfig rc;
  if (!raw.is_object()) throw ConfigError("config: expected a JSON object");
  Node root(raw, "");
  root.only({"market", "grid", "seed", "n_paths", "tolerances", "estimator", "claims",
             "lattice", "output"});
  if (!root.has("market")) fail("market", "required section is missing");
  rc.market = read_market(root.object("market"));

  Node g = root.object("grid");
  g.only({"horizon", "n_steps"});
  const double horizon = g.positive("horizon", 1.0);
  const std::size_t steps = g.integer("n_steps", 50, 1);
  rc.grid = TimeGrid::uniform(horizon, steps);

  rc.seed = root.integer("seed", 1);
  rc.n_paths = root.integer("n_paths", 10000, 2);

  Node t = root.object("tolerances");
  t.only({"arbitrage", "rank", "replication", "attainability", "integrability_cap"});
  rc.tolerances.arbitrage = t.positive("arbitrage", 1e-8);
  rc.tolerances.rank = t.positive("rank", 1e-10);
  rc.tolerances.replication = t.positive("replication", 1e-6);
  rc.tolerances.attainability = t.positive("attainability", 1e-8);
  rc.tolerances.integrability_cap = t.positive("integrability_cap", 1e8);

  Node e = root.object("estimator");
  e.only({"kind", "degree", "itm_only"});
  rc.estimator.kind = e.text("kind", "regression");
  if (rc.estimator.kind != "regression" && rc.estimator.kind != "lattice") {
    fail(e.field("kind"), "expected regression or lattice");
  }
  rc.estimator.degree = static_cast<int>(e.integer("degree", 4));
  if (rc.estimator.degree > 8) fail(e.field("degree"), "at most 8");
  rc.estimator.itm_only = e.boolean("itm_only", true);

  rc.lattice = read_lattice(raw, *rc.market, rc.grid);

  if (!root.has("claims")) raw["claims"] = Json::array();
  Json& claims = raw["claims"];
  if (!claims.is_array()) fail("claims", "expected an array");
  inline_claim_files(claims, base_dir);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    rc.claims.push_back(
        read_claim(Node(claims[i], "claims[" + std::to_string(i) + "]"), *rc.market, rc.grid));
    if (!ids.insert(rc.claims.back().id).second) {
      fail("claims[" + std::to_string(i) + "].id", "duplicate id '" + rc.claims.back().id + "'");
    }
  }

  Node o = root.object("output");
  o.only({"dir", "hedge_path", "max_csv_paths"});
  rc.output.dir = o.text("dir", "out");
  rc.output.hedge_path = o.integer("hedge_path", 0);
  if (rc.output.hedge_path >= rc.n_paths) fail(o.field("hedge_path"), "beyond n_paths");
  rc.output.max_csv_paths = o.integer("max_csv_paths", 100);

  rc.resolved = std::move(raw);
  return rc;
}

RunConfig load_config(const std::filesystem::path& path,
                      const std::map<std::string, std::string>& env,
                      const CommandLineOverrides& flags) {
  Json raw = load_json_file(path);
  if (!raw.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  apply_env_overrides(raw, env);
  if (flags.seed) raw["seed"] = *flags.seed;
  if (flags.paths) raw["n_paths"] = *flags.paths;
  if (flags.out) raw["output"]["dir"] = *flags.out;
  return resolve_config(std::move(raw), path.parent_path());
}

}  // namespace tameval::cli
