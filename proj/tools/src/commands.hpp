#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace tameval::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFinding = 1,     // arbitrage found, claim not attainable
  kExitValidation = 2,  // usage or configuration error
  kExitNumerical = 3,   // simulation produced non-finite values
};

const std::vector<std::string>& command_names();

/// Runs one subcommand, writing report.json, resolved_config.json and the
/// command's CSV files under config.output.dir. Stdout receives the resolved
/// config and the report; stderr the findings. Never throws.
int run_command(const std::string& name, const RunConfig& config,
                const std::optional<std::string>& claim_filter, std::ostream& out,
                std::ostream& err);

}  // namespace tameval::cli
