#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabilizer/experiments.hpp"
#include "stabilizer/simulator.hpp"

namespace stabilizer::cli {

/// Malformed or inconsistent configuration document.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kDeterministic, kStochastic };

/// Fully resolved configuration. Every field has a concrete value after
/// parsing, so `to_json` is a complete echo.
struct CliConfig {
  std::optional<std::string> preset;
  std::vector<ComplexMatrix> hamiltonians;
  double period = 25.0;
  int harmonics = 4;
  std::vector<double> gains;
  ComplexMatrix x0;
  ComplexMatrix goal;
  /// Second goal of the paired Monte-Carlo comparison.
  ComplexMatrix goal2;
  Mode mode = Mode::kDeterministic;
  /// Deterministic amplitudes; drawn from (seed, run_id) on [-a_max, a_max]
  /// when absent from the document.
  std::optional<Eigen::MatrixXd> amplitudes;
  double a_max = 0.25;
  double stochastic_a_max = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t run_id = 0;
  bool pin_first_draw = false;
  int n_periods = 10;
  int steps_per_period = 4096;
  Strategy strategy = Strategy::kDirect;
  TwoStepOptions two_step{};
  double singular_tol = kSingularTol;
  double unitarity_tol = kUnitarityTol;
  double monotonicity_tol = 1e-8;
  int dense_decimation = 16;
  double tail_fraction = 0.6;
  int mc_runs = 50;
  int mc_periods = 25;
};

/// Defaults of the named preset. Only "cnot-u4" exists.
CliConfig preset_config(const std::string& name);

/// Strict parse: unknown keys, wrong types and shape mismatches throw
/// SchemaError. A run.json envelope is accepted through its "config" key.
CliConfig parse_config(const nlohmann::json& doc);

nlohmann::json to_json(const CliConfig& config);

/// Reads and parses a JSON file. Throws SchemaError on I/O or parse errors.
nlohmann::json read_json_file(const std::string& path);

/// Matrices travel as rows of [re, im] pairs.
nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j, const std::string& where);

SystemDef system_of(const CliConfig& config);

/// Amplitudes of the deterministic law, explicit or drawn.
AmplitudeVector resolved_amplitudes(const CliConfig& config);

RunConfig to_run_config(const CliConfig& config);

/// CnotExperiment with parameters taken from the configuration.
CnotExperiment experiment_of(const CliConfig& config);

const char* strategy_name(Strategy s);
const char* mode_name(Mode m);

}  // namespace stabilizer::cli
