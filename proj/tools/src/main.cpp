#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "tameval/parallel.hpp"

int main(int argc, char** argv) {
  using namespace tameval::cli;

  CLI::App app{"Deflator-based valuation and hedging of state contingent claims"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> out_dir;
  std::optional<std::string> claim;
  std::size_t threads = 0;

  const std::map<std::string, std::string> about = {
      {"simulate", "Simulate scenarios and deflators"},
      {"check-arbitrage", "Test for state arbitrage and simulate the arbitrage gain"},
      {"price-european", "Value European claims"},
      {"price-american", "Value American claims by the stopping-time tournament"},
      {"hedge", "Check attainability and build replication portfolios"},
      {"oracle", "Exact values on a binomial lattice"}};
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "Override the random seed");
    sub->add_option("--paths", paths, "Override the number of paths")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
    sub->add_option("--threads", threads, "Worker cap; 0 uses every core");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--claim", claim, "Restrict to the claim with this id");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (threads > 0) tameval::set_max_threads(threads);

  RunConfig rc;
  try {
    rc = load_config(config_path, environment_overrides(), {seed, paths, out_dir});
  } catch (const tameval::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return run_command(command, rc, claim, std::cout, std::cerr);
}
