#include "stabilizer/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "stabilizer/errors.hpp"
#include "stabilizer/rng.hpp"

namespace stabilizer::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {
    "preset",         "hamiltonians",     "period",         "harmonics",     "gain",
    "gains",          "x0",               "goal",           "goal2",         "mode",
    "amplitudes",     "a_max",            "stochastic_a_max", "seed",        "run_id",
    "pin_first_draw", "n_periods",        "steps_per_period", "strategy",    "switch_margin",
    "switch_tol",     "singular_tol",     "unitarity_tol",  "monotonicity_tol",
    "dense_decimation", "tail_fraction",  "montecarlo"};

const std::set<std::string> kEnvelopeKeys = {"config", "seed", "summary", "rate_fit", "format"};

const std::set<std::string> kMonteCarloKeys = {"n_runs", "n_periods"};

[[noreturn]] void fail(const std::string& message) { throw SchemaError(message); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

double get_double(const json& j, const std::string& key) {
  if (!j.is_number()) fail("'" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail("'" + key + "' must be finite");
  return v;
}

double get_positive(const json& j, const std::string& key) {
  const double v = get_double(j, key);
  if (!(v > 0.0)) fail("'" + key + "' must be positive");
  return v;
}

int get_int(const json& j, const std::string& key, int min) {
  if (!j.is_number_integer()) fail("'" + key + "' must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < min || v > 100000000) fail("'" + key + "' is out of range");
  return static_cast<int>(v);
}

std::uint64_t get_u64(const json& j, const std::string& key) {
  if (!j.is_number_unsigned()) fail("'" + key + "' must be a non-negative integer");
  return j.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) fail("'" + key + "' must be a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) fail("'" + key + "' must be a string");
  return j.get<std::string>();
}

ComplexMatrix named_goal(const std::string& name, const CliConfig& cfg, const std::string& key) {
  if (name == "identity") {
    const auto n = cfg.hamiltonians.empty() ? 0 : cfg.hamiltonians.front().rows();
    if (n == 0) fail("'" + key + "' = identity needs the system first");
    return ComplexMatrix::Identity(n, n);
  }
  if (cfg.preset == "cnot-u4") {
    const CnotExperiment e = build_cnot_system();
    if (name == "goal1") return e.goal1.matrix();
    if (name == "goal2") return e.goal2.matrix();
    if (name == "cnot") return cnot_gate().matrix();
  }
  fail("unknown named matrix '" + name + "' for '" + key + "'");
}

ComplexMatrix goal_from_json(const json& j, const CliConfig& cfg, const std::string& key) {
  if (j.is_string()) return named_goal(j.get<std::string>(), cfg, key);
  return matrix_from_json(j, key);
}

Strategy parse_strategy(const std::string& s) {
  if (s == "direct") return Strategy::kDirect;
  if (s == "two_step") return Strategy::kTwoStep;
  if (s == "phase_shifted") return Strategy::kPhaseShifted;
  fail("strategy must be one of direct, two_step, phase_shifted");
}

Mode parse_mode(const std::string& s) {
  if (s == "deterministic") return Mode::kDeterministic;
  if (s == "stochastic") return Mode::kStochastic;
  fail("mode must be deterministic or stochastic");
}

void check_unitary(const ComplexMatrix& m, const std::string& key, double tol) {
  if (m.rows() != m.cols()) fail("'" + key + "' must be square");
  if (unitarity_defect(m) > tol) fail("'" + key + "' is not unitary");
}

}  // namespace

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kDirect:
      return "direct";
    case Strategy::kTwoStep:
      return "two_step";
    case Strategy::kPhaseShifted:
      return "phase_shifted";
  }
  return "direct";
}

const char* mode_name(Mode m) { return m == Mode::kStochastic ? "stochastic" : "deterministic"; }

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail("'" + where + "' must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) fail("'" + where + "' rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail("'" + where + "' rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& e = row[c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        fail("'" + where + "' entries must be [re, im] number pairs");
      }
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) {
        fail("'" + where + "' entries must be finite");
      }
    }
  }
  return m;
}

CliConfig preset_config(const std::string& name) {
  if (name != "cnot-u4") fail("unknown preset '" + name + "'");
  const CnotExperiment e = build_cnot_system();
  CliConfig cfg;
  cfg.preset = name;
  cfg.hamiltonians = cnot_hamiltonians();
  cfg.period = e.params.period;
  cfg.harmonics = e.params.harmonics;
  cfg.gains.assign(static_cast<std::size_t>(e.sys.m()), e.params.gain);
  cfg.x0 = ComplexMatrix::Identity(4, 4);
  cfg.goal = e.goal1.matrix();
  cfg.goal2 = e.goal2.matrix();
  cfg.a_max = e.params.a_max;
  cfg.stochastic_a_max = e.params.stochastic_a_max;
  return cfg;
}

CliConfig parse_config(const json& input) {
  if (!input.is_object()) fail("configuration must be a JSON object");
  if (input.contains("config")) {
    reject_unknown(input, kEnvelopeKeys, "run envelope");
    return parse_config(input.at("config"));
  }
  reject_unknown(input, kConfigKeys, "configuration");

  CliConfig cfg;
  if (input.contains("preset")) {
    cfg = preset_config(get_string(input["preset"], "preset"));
    if (input.contains("hamiltonians")) fail("'hamiltonians' conflicts with 'preset'");
  } else {
    if (!input.contains("hamiltonians")) fail("either 'preset' or 'hamiltonians' is required");
    if (!input.contains("goal")) fail("'goal' is required without a preset");
  }

  if (input.contains("hamiltonians")) {
    const json& hs = input["hamiltonians"];
    if (!hs.is_array() || hs.empty()) fail("'hamiltonians' must be a non-empty array");
    cfg.hamiltonians.clear();
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const std::string where = "hamiltonians[" + std::to_string(k) + "]";
      ComplexMatrix h = matrix_from_json(hs[k], where);
      if (h.rows() != h.cols()) fail("'" + where + "' must be square");
      if (!cfg.hamiltonians.empty() && h.rows() != cfg.hamiltonians.front().rows()) {
        fail("all hamiltonians must share one dimension");
      }
      if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm())) {
        fail("'" + where + "' is not Hermitian");
      }
      cfg.hamiltonians.push_back(std::move(h));
    }
    const auto n = cfg.hamiltonians.front().rows();
    cfg.x0 = ComplexMatrix::Identity(n, n);
    cfg.gains.assign(cfg.hamiltonians.size(), 0.75);
  }
  const auto n = cfg.hamiltonians.front().rows();
  const auto m = static_cast<int>(cfg.hamiltonians.size());

  if (input.contains("period")) cfg.period = get_positive(input["period"], "period");
  if (input.contains("harmonics")) cfg.harmonics = get_int(input["harmonics"], "harmonics", 1);
  if (input.contains("gain") && input.contains("gains")) fail("give 'gain' or 'gains', not both");
  if (input.contains("gain")) cfg.gains.assign(m, get_positive(input["gain"], "gain"));
  if (input.contains("gains")) {
    const json& g = input["gains"];
    if (!g.is_array() || static_cast<int>(g.size()) != m) fail("'gains' needs one entry per control");
    cfg.gains.clear();
    for (const auto& v : g) cfg.gains.push_back(get_positive(v, "gains"));
  }
  if (input.contains("singular_tol")) cfg.singular_tol = get_positive(input["singular_tol"], "singular_tol");
  if (input.contains("unitarity_tol")) cfg.unitarity_tol = get_positive(input["unitarity_tol"], "unitarity_tol");
  if (input.contains("monotonicity_tol")) {
    cfg.monotonicity_tol = get_positive(input["monotonicity_tol"], "monotonicity_tol");
  }

  if (input.contains("x0")) cfg.x0 = goal_from_json(input["x0"], cfg, "x0");
  if (input.contains("goal")) cfg.goal = goal_from_json(input["goal"], cfg, "goal");
  if (input.contains("goal2")) {
    cfg.goal2 = goal_from_json(input["goal2"], cfg, "goal2");
  } else if (!cfg.preset) {
    cfg.goal2 = cfg.goal;
  }
  for (const auto* key : {"x0", "goal", "goal2"}) {
    const ComplexMatrix& mat = std::string(key) == "x0" ? cfg.x0 : (std::string(key) == "goal" ? cfg.goal : cfg.goal2);
    if (mat.rows() != n || mat.cols() != n) fail(std::string("'") + key + "' must match the system dimension");
    check_unitary(mat, key, 1e-9);
  }

  if (input.contains("mode")) cfg.mode = parse_mode(get_string(input["mode"], "mode"));
  if (input.contains("a_max")) cfg.a_max = get_positive(input["a_max"], "a_max");
  if (input.contains("stochastic_a_max")) {
    cfg.stochastic_a_max = get_positive(input["stochastic_a_max"], "stochastic_a_max");
  }
  if (input.contains("amplitudes")) {
    const json& a = input["amplitudes"];
    if (!a.is_array() || static_cast<int>(a.size()) != m) fail("'amplitudes' needs one row per control");
    Eigen::MatrixXd values(m, cfg.harmonics);
    for (int k = 0; k < m; ++k) {
      if (!a[k].is_array() || static_cast<int>(a[k].size()) != cfg.harmonics) {
        fail("'amplitudes' rows need one entry per harmonic");
      }
      for (int l = 0; l < cfg.harmonics; ++l) values(k, l) = get_double(a[k][l], "amplitudes");
    }
    cfg.amplitudes = std::move(values);
  }
  if (input.contains("seed")) cfg.seed = get_u64(input["seed"], "seed");
  if (input.contains("run_id")) cfg.run_id = get_u64(input["run_id"], "run_id");
  if (input.contains("pin_first_draw")) cfg.pin_first_draw = get_bool(input["pin_first_draw"], "pin_first_draw");
  if (input.contains("n_periods")) cfg.n_periods = get_int(input["n_periods"], "n_periods", 1);
  if (input.contains("steps_per_period")) {
    cfg.steps_per_period = get_int(input["steps_per_period"], "steps_per_period", 16);
  }
  if (input.contains("strategy")) cfg.strategy = parse_strategy(get_string(input["strategy"], "strategy"));
  if (input.contains("switch_margin")) cfg.two_step.switch_margin = get_positive(input["switch_margin"], "switch_margin");
  if (input.contains("switch_tol")) cfg.two_step.switch_tol = get_positive(input["switch_tol"], "switch_tol");
  if (input.contains("dense_decimation")) {
    cfg.dense_decimation = get_int(input["dense_decimation"], "dense_decimation", 1);
  }
  if (input.contains("tail_fraction")) {
    cfg.tail_fraction = get_positive(input["tail_fraction"], "tail_fraction");
    if (cfg.tail_fraction > 1.0) fail("'tail_fraction' must lie in (0, 1]");
  }
  if (input.contains("montecarlo")) {
    const json& mc = input["montecarlo"];
    if (!mc.is_object()) fail("'montecarlo' must be an object");
    reject_unknown(mc, kMonteCarloKeys, "montecarlo");
    if (mc.contains("n_runs")) cfg.mc_runs = get_int(mc["n_runs"], "montecarlo.n_runs", 1);
    if (mc.contains("n_periods")) cfg.mc_periods = get_int(mc["n_periods"], "montecarlo.n_periods", 1);
  }
  return cfg;
}

json to_json(const CliConfig& cfg) {
  json j;
  if (cfg.preset) {
    j["preset"] = *cfg.preset;
  } else {
    json hs = json::array();
    for (const auto& h : cfg.hamiltonians) hs.push_back(matrix_to_json(h));
    j["hamiltonians"] = std::move(hs);
  }
  j["period"] = cfg.period;
  j["harmonics"] = cfg.harmonics;
  j["gains"] = cfg.gains;
  j["x0"] = matrix_to_json(cfg.x0);
  j["goal"] = matrix_to_json(cfg.goal);
  j["goal2"] = matrix_to_json(cfg.goal2);
  j["mode"] = mode_name(cfg.mode);
  const Eigen::MatrixXd amps = resolved_amplitudes(cfg).values();
  json rows = json::array();
  for (Eigen::Index k = 0; k < amps.rows(); ++k) {
    json row = json::array();
    for (Eigen::Index l = 0; l < amps.cols(); ++l) row.push_back(amps(k, l));
    rows.push_back(std::move(row));
  }
  j["amplitudes"] = std::move(rows);
  j["a_max"] = cfg.a_max;
  j["stochastic_a_max"] = cfg.stochastic_a_max;
  j["seed"] = cfg.seed;
  j["run_id"] = cfg.run_id;
  j["pin_first_draw"] = cfg.pin_first_draw;
  j["n_periods"] = cfg.n_periods;
  j["steps_per_period"] = cfg.steps_per_period;
  j["strategy"] = strategy_name(cfg.strategy);
  j["switch_margin"] = cfg.two_step.switch_margin;
  j["switch_tol"] = cfg.two_step.switch_tol;
  j["singular_tol"] = cfg.singular_tol;
  j["unitarity_tol"] = cfg.unitarity_tol;
  j["monotonicity_tol"] = cfg.monotonicity_tol;
  j["dense_decimation"] = cfg.dense_decimation;
  j["tail_fraction"] = cfg.tail_fraction;
  j["montecarlo"] = {{"n_runs", cfg.mc_runs}, {"n_periods", cfg.mc_periods}};
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail("'" + path + "' is not valid JSON: " + e.what());
  }
}

SystemDef system_of(const CliConfig& cfg) {
  std::vector<SkewHermitianMatrix> generators;
  generators.reserve(cfg.hamiltonians.size());
  for (const auto& h : cfg.hamiltonians) generators.push_back(SkewHermitianMatrix::from_hamiltonian(h));
  return SystemDef(std::move(generators));
}

AmplitudeVector resolved_amplitudes(const CliConfig& cfg) {
  if (cfg.amplitudes) return AmplitudeVector(*cfg.amplitudes);
  SeedState state = stream(cfg.seed, cfg.run_id, 0, StreamTag::kDeterministicDraw);
  return sample_amplitudes_symmetric(state, static_cast<int>(cfg.hamiltonians.size()), cfg.harmonics,
                                     cfg.a_max);
}

RunConfig to_run_config(const CliConfig& cfg) {
  AmplitudeMode mode = FixedAmplitudes{resolved_amplitudes(cfg)};
  if (cfg.mode == Mode::kStochastic) {
    StochasticAmplitudes s{cfg.stochastic_a_max, cfg.seed, cfg.run_id, std::nullopt};
    if (cfg.pin_first_draw) s.first_draw = resolved_amplitudes(cfg);
    mode = s;
  }
  RunConfig rc{
      .sys = system_of(cfg),
      .period = cfg.period,
      .harmonics = cfg.harmonics,
      .amps_mode = std::move(mode),
      .gains = FeedbackGains(cfg.gains),
      .x0 = UnitaryMatrix::from(cfg.x0, 1e-9),
      .x_goal = UnitaryMatrix::from(cfg.goal, 1e-9),
      .n_periods = cfg.n_periods,
      .steps_per_period = cfg.steps_per_period,
      .strategy = cfg.strategy,
      .two_step = cfg.two_step,
      .singular_tol = cfg.singular_tol,
      .unitarity_tol = cfg.unitarity_tol,
      .monotonicity_tol = cfg.monotonicity_tol,
      .dense_decimation = cfg.dense_decimation,
  };
  return rc;
}

CnotExperiment experiment_of(const CliConfig& cfg) {
  for (double g : cfg.gains) {
    if (g != cfg.gains.front()) fail("montecarlo needs a uniform gain");
  }
  CnotParameters params;
  params.harmonics = cfg.harmonics;
  params.a_max = cfg.a_max;
  params.stochastic_a_max = cfg.stochastic_a_max;
  params.gain = cfg.gains.front();
  params.period = cfg.period;
  return CnotExperiment{system_of(cfg), UnitaryMatrix::from(cfg.goal, 1e-9),
                        UnitaryMatrix::from(cfg.goal2, 1e-9), params};
}

}  // namespace stabilizer::cli
