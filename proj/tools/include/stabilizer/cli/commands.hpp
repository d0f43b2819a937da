#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabilizer/cli/config.hpp"

namespace stabilizer::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // rank deficiency, or every Monte-Carlo run failed
  kExitUsage = 2,    // bad flags or schema failure
  kExitRuntime = 3,  // NotInW, IntegratorTolerance, SwitchNeverReached, ...
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_check(const CliConfig& config, std::ostream& out);
int cmd_simulate(const CliConfig& config, const std::string& out_dir, std::ostream& out);
int cmd_montecarlo(const CliConfig& config, const std::string& out_dir, std::ostream& out);

/// Refits the rate from a periods.csv or run directory.
int cmd_rate(const std::string& input, double tail_fraction, std::ostream& out);

/// {"error": {"kind": ..., "message": ...}}
nlohmann::json error_object(const std::string& kind, const std::string& message);

}  // namespace stabilizer::cli
