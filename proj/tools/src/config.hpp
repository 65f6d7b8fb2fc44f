#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tameval/claims.hpp"
#include "tameval/errors.hpp"
#include "tameval/lattice.hpp"
#include "tameval/market_model.hpp"
#include "tameval/time_grid.hpp"

namespace tameval::cli {

// std::map-backed, so references to members survive later insertions.
using Json = nlohmann::json;

/// Bad or missing configuration; the message names the offending field.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct Tolerances {
  double arbitrage = 1e-8;
  double rank = 1e-10;
  double replication = 1e-6;
  double attainability = 1e-8;
  double integrability_cap = 1e8;  // per-path coefficient and |theta|^2 integrals
};

struct EstimatorConfig {
  std::string kind = "regression";  // or "lattice"
  int degree = 4;
  bool itm_only = true;
};

struct LatticeConfig {
  double spot = 100.0;
  double rate = 0.0;
  double volatility = 0.2;
  double dividend = 0.0;
  double horizon = 1.0;
  std::size_t n_steps = 1000;
  double physical_up = -1.0;

  Lattice build() const;
  Lattice build(std::size_t steps) const;
};

struct ClaimConfig {
  std::string id;
  std::string type;  // "european" or "american"
  EuropeanClaim european;
  AmericanClaim american;
};

struct OutputConfig {
  std::filesystem::path dir = "out";
  std::size_t hedge_path = 0;
  std::size_t max_csv_paths = 100;
};

struct RunConfig {
  std::shared_ptr<const MarketModel> market;
  TimeGrid grid;
  std::uint64_t seed = 1;
  std::size_t n_paths = 10000;
  Tolerances tolerances;
  EstimatorConfig estimator;
  std::optional<LatticeConfig> lattice;  // absent when nothing supplies defaults
  std::vector<ClaimConfig> claims;
  OutputConfig output;
  Json resolved;  // every default written out
};

/// Overrides taken from the command line; they win over file and env.
struct CommandLineOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> out;
};

/// TAMEVAL_GRID__N_STEPS=200 sets grid.n_steps. Values are parsed as JSON
/// when possible and taken as strings otherwise.
void apply_env_overrides(Json& config, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> environment_overrides();

Json load_json_file(const std::filesystem::path& path);

/// Fills defaults into the raw document and builds the typed objects.
/// `base_dir` resolves claim files.
RunConfig resolve_config(Json raw, const std::filesystem::path& base_dir);

RunConfig load_config(const std::filesystem::path& path,
                      const std::map<std::string, std::string>& env,
                      const CommandLineOverrides& flags);

}  // namespace tameval::cli
