#include "stabilizer/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "stabilizer/cli/format.hpp"
#include "stabilizer/errors.hpp"

namespace stabilizer::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

json rate_json(const RunLog& log, double tail_fraction) {
  try {
    const RateFit fit = rate_fit(log, tail_fraction);
    json j{{"samples", fit.samples}, {"underflow", fit.underflow}, {"r_squared", fit.r_squared}};
    j["slope"] = fit.underflow ? json(nullptr) : json(fit.slope);
    return j;
  } catch (const InsufficientData& e) {
    return json{{"error", e.what()}};
  }
}

json strategy_summary(const StrategySummary& s) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"median", num(s.median)}, {"min", num(s.min)}, {"max", num(s.max)}, {"completed", s.completed}};
}

std::string outcome_errors(const MonteCarloRecord& r) {
  std::string out;
  auto add = [&out](const char* tag, const std::optional<std::string>& e) {
    if (!e) return;
    if (!out.empty()) out += "; ";
    out += std::string(tag) + ": " + *e;
  };
  add("goal1/deterministic", r.goal1.det_error);
  add("goal1/stochastic", r.goal1.stoch_error);
  add("goal2/deterministic", r.goal2.det_error);
  add("goal2/stochastic", r.goal2.stoch_error);
  return out;
}

std::vector<double> read_lyapunov_column(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw SchemaError("cannot open '" + csv.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + csv.string() + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), "lyapunov");
  if (it == header.end()) throw SchemaError("'" + csv.string() + "' has no lyapunov column");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(ss, cell, ',');
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw SchemaError("bad lyapunov value '" + cell + "'");
    }
  }
  return values;
}

}  // namespace

json error_object(const std::string& kind, const std::string& message) {
  return json{{"error", {{"kind", kind}, {"message", message}}}};
}

int cmd_check(const CliConfig& config, std::ostream& out) {
  const SystemDef sys = system_of(config);
  const int full = sys.n() * sys.n();
  const BracketClosureReport report = lie_closure(sys, 6);
  out << "rank " << report.rank << "/" << full << ", depth " << report.max_depth_used << "\n";
  bool ok = report.rank == full;
  if (config.amplitudes) {
    const int depth = default_admissibility_depth(config.harmonics);
    const int rank = admissibility_rank(sys, AmplitudeVector(*config.amplitudes), config.period, depth);
    out << "admissibility rank " << rank << "/" << full << ", depth " << depth << "\n";
    ok = ok && rank == full;
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_simulate(const CliConfig& config, const std::string& out_dir, std::ostream& out) {
  const RunConfig rc = to_run_config(config);
  const RunLog log = run(rc);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  {
    auto os = open_output(dir / "periods.csv");
    write_csv_row(os, {"j", "t", "err_frobenius", "lyapunov", "amps_hash"});
    for (const auto& s : log.period_samples) {
      const std::string hash =
          s.j == 0 ? std::string(16, '0') : amplitude_hash(log.amps_history[s.j - 1].values());
      write_csv_row(os, {std::to_string(s.j), format_double(s.t), format_double(s.error),
                         format_double(s.lyapunov), hash});
    }
  }
  {
    auto os = open_output(dir / "dense.csv");
    write_csv_row(os, {"t", "u_norm", "lyapunov"});
    for (const auto& d : log.dense_samples) {
      write_csv_row(os, {format_double(d.t), format_double(d.u_norm), format_double(d.lyapunov)});
    }
  }

  const auto& first = log.period_samples.front();
  const auto& last = log.period_samples.back();
  double max_defect = 0.0;
  for (const auto& s : log.period_samples) max_defect = std::max(max_defect, s.unitarity_defect);
  json summary{{"initial_error", first.error},
               {"final_error", last.error},
               {"initial_lyapunov", first.lyapunov},
               {"final_lyapunov", last.lyapunov},
               {"periods", static_cast<int>(log.period_samples.size()) - 1},
               {"max_lyapunov_increase", log.max_lyapunov_increase},
               {"max_unitarity_defect", max_defect},
               {"phase_shift", log.phase_shift}};
  summary["switch_period"] = log.switch_period ? json(*log.switch_period) : json(nullptr);
  if (log.effective_goal) summary["effective_goal"] = matrix_to_json(log.effective_goal->matrix());

  const json doc{{"format", "stabilizer-run/1"},
                 {"config", to_json(config)},
                 {"seed", config.seed},
                 {"summary", summary},
                 {"rate_fit", rate_json(log, config.tail_fraction)}};
  {
    auto os = open_output(dir / "run.json");
    os << doc.dump(2) << "\n";
  }
  out << "final error " << format_double(last.error) << ", V " << format_double(last.lyapunov)
      << " after " << log.period_samples.size() - 1 << " periods\n";
  return kExitOk;
}

int cmd_montecarlo(const CliConfig& config, const std::string& out_dir, std::ostream& out) {
  const CnotExperiment experiment = experiment_of(config);
  MonteCarloOptions opts;
  opts.n_runs = config.mc_runs;
  opts.n_periods = config.mc_periods;
  opts.steps_per_period = config.steps_per_period;
  opts.seed = config.seed;
  opts.pin_first_draw = config.pin_first_draw;
  opts.threads = configured_threads();
  const MonteCarloReport report = monte_carlo(experiment, opts);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  int failed_runs = 0;
  {
    auto os = open_output(dir / "montecarlo.csv");
    write_csv_row(os, {"p", "amps_hash", "goal1_det", "goal1_stoch", "goal2_det", "goal2_stoch", "error"});
    for (const auto& r : report.runs) {
      const std::string errors = outcome_errors(r);
      if (!errors.empty()) ++failed_runs;
      write_csv_row(os, {std::to_string(r.p), amplitude_hash(r.amps.values()),
                         format_double(r.goal1.det_final_error), format_double(r.goal1.stoch_final_error),
                         format_double(r.goal2.det_final_error), format_double(r.goal2.stoch_final_error),
                         errors});
    }
  }

  const auto& g1 = report.goal1;
  const bool median_ok = g1.stochastic.median <= g1.deterministic.median;
  const bool spread_ok = g1.stochastic.max <= 10.0 * g1.deterministic.min;
  const json summary{
      {"n_runs", config.mc_runs},
      {"n_periods", config.mc_periods},
      {"seed", config.seed},
      {"failed_runs", failed_runs},
      {"goal1", {{"deterministic", strategy_summary(g1.deterministic)},
                 {"stochastic", strategy_summary(g1.stochastic)}}},
      {"goal2", {{"deterministic", strategy_summary(report.goal2.deterministic)},
                 {"stochastic", strategy_summary(report.goal2.stochastic)}}},
      {"verdict", {{"stochastic_median_le_deterministic", median_ok},
                   {"stochastic_max_le_10x_deterministic_min", spread_ok},
                   {"stochastic_better", median_ok && spread_ok}}}};
  {
    auto os = open_output(dir / "summary.json");
    os << summary.dump(2) << "\n";
  }
  out << "goal1 median deterministic " << format_double(g1.deterministic.median) << ", stochastic "
      << format_double(g1.stochastic.median) << "\n";
  return failed_runs == config.mc_runs ? kExitFailure : kExitOk;
}

int cmd_rate(const std::string& input, double tail_fraction, std::ostream& out) {
  fs::path path(input);
  if (fs::is_directory(path)) path /= "periods.csv";
  const std::vector<double> v = read_lyapunov_column(path);
  const RateFit fit = rate_fit(v, tail_fraction);
  json j{{"samples", fit.samples}, {"underflow", fit.underflow}, {"r_squared", fit.r_squared}};
  j["slope"] = fit.underflow ? json(nullptr) : json(fit.slope);
  out << j.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampled Lyapunov stabilization of quantum gates on U(n)", "stabilizer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out_dir = "stabilizer-out";
  std::string input;
  std::optional<std::uint64_t> seed;
  double tail = 0.6;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration or run.json");
    sub->add_option("--preset", preset, "Named preset (cnot-u4)");
    sub->add_option("--seed", seed, "Overrides the configured seed");
  };
  auto* check = app.add_subcommand("check", "Lie-algebra rank and admissibility test");
  add_common(check);
  auto* simulate = app.add_subcommand("simulate", "Single closed-loop run");
  add_common(simulate);
  simulate->add_option("--out", out_dir, "Output directory");
  auto* montecarlo = app.add_subcommand("montecarlo", "Paired deterministic/stochastic batch");
  add_common(montecarlo);
  montecarlo->add_option("--out", out_dir, "Output directory");
  auto* rate = app.add_subcommand("rate", "Fit ln V(jT) from periods.csv");
  rate->add_option("--in", input, "periods.csv or a simulate output directory")->required();
  rate->add_option("--tail", tail, "Tail fraction")->check(CLI::Range(0.0, 1.0));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (rate->parsed()) return cmd_rate(input, tail, out);

    CliConfig config;
    if (!config_path.empty()) {
      json doc = read_json_file(config_path);
      if (!preset.empty()) {
        json& body = (doc.is_object() && doc.contains("config")) ? doc["config"] : doc;
        if (body.is_object() && !body.contains("preset")) body["preset"] = preset;
      }
      config = parse_config(doc);
    } else if (!preset.empty()) {
      config = preset_config(preset);
    } else {
      err << "one of --config or --preset is required\n";
      return kExitUsage;
    }
    if (seed) config.seed = *seed;

    if (check->parsed()) return cmd_check(config, out);
    if (simulate->parsed()) return cmd_simulate(config, out_dir, out);
    return cmd_montecarlo(config, out_dir, out);
  } catch (const SchemaError& e) {
    out << error_object("SchemaError", e.what()).dump() << "\n";
    return kExitUsage;
  } catch (const InvariantViolation& e) {
    out << error_object(e.kind(), e.what()).dump() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    out << error_object(e.kind(), e.what()).dump() << "\n";
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    out << error_object("InvalidArgument", e.what()).dump() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    out << error_object("IOError", e.what()).dump() << "\n";
    return kExitRuntime;
  }
}

}  // namespace stabilizer::cli
