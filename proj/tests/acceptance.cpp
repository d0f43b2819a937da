// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 125).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stabilizer/cli/commands.hpp"
#include "stabilizer/cli/config.hpp"
#include "stabilizer/errors.hpp"
#include "stabilizer/experiments.hpp"

namespace {

using namespace stabilizer;

// Pinned thresholds.
constexpr int kMaxCheckDepth = 3;
constexpr int kAdmissibleRequired = 49;          // of 50
constexpr double kMonotonicityTol = 1e-8;
constexpr double kUnitarityBound = 1e-9;
constexpr double kReferenceTol = 1e-7;
constexpr double kLyapunovFormulaTol = 1e-8;
constexpr double kConvergenceFactor = 0.1;
constexpr int kDetConvergedRequired = 45;        // of 50
constexpr int kStochConvergedRequired = 49;      // of 50
constexpr double kRateMinR2 = 0.9;
constexpr double kRateTail = 0.6;
constexpr int kDetRateRequired = 45;             // of 50
constexpr int kStochRateRequired = 49;           // of 50
constexpr double kSpreadFactor = 10.0;
constexpr double kTwoStepErrorBound = 0.1;
constexpr int kTwoStepPeriods = 30;
constexpr double kRichardsonLo = 3.4;
constexpr double kRichardsonHi = 4.6;
constexpr double kQIdentityBound = 1e-10;
constexpr double kQOffset = 0.5;
constexpr int kQSamples = 200;
constexpr int kBootstrapResamples = 10000;

constexpr int kRuns = 50;
constexpr int kSteps = 4096;
constexpr std::uint64_t kSeed = 1;

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s  %-32s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct RunOutcome {
  bool ok = false;
  std::string error;
  std::vector<double> lyapunov;
  double initial_error = 0.0;
  double final_error = 0.0;
  double max_increase = 0.0;
  double max_defect = 0.0;
};

RunOutcome execute(const RunConfig& config) {
  RunOutcome out;
  try {
    const RunLog log = run(config);
    out.ok = true;
    for (const auto& s : log.period_samples) {
      out.lyapunov.push_back(s.lyapunov);
      out.max_defect = std::max(out.max_defect, s.unitarity_defect);
    }
    for (std::size_t i = 1; i < out.lyapunov.size(); ++i) {
      out.max_increase = std::max(out.max_increase, out.lyapunov[i] - out.lyapunov[i - 1]);
    }
    out.max_increase = std::max(out.max_increase, log.max_lyapunov_increase);
    out.initial_error = log.period_samples.front().error;
    out.final_error = log.period_samples.back().error;
  } catch (const Error& e) {
    out.error = e.kind() + ": " + e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------

void controllability() {
  std::ostringstream os;
  const int code = cli::cmd_check(cli::preset_config("cnot-u4"), os);
  std::string line = os.str();
  if (!line.empty() && line.back() == '\n') line.pop_back();
  int rank = 0, full = 0, depth = -1;
  std::sscanf(line.c_str(), "rank %d/%d, depth %d", &rank, &full, &depth);
  report(code == 0 && rank == 16 && full == 16 && depth >= 0 && depth <= kMaxCheckDepth, "controllability",
         "check: \"" + line + "\"");
}

void admissibility(const CnotExperiment& e) {
  int full = 0;
  for (int p = 0; p < kRuns; ++p) {
    const AmplitudeVector a = deterministic_draw(e, kSeed, static_cast<std::uint64_t>(p));
    if (admissibility_rank(e.sys, a, e.params.period, default_admissibility_depth(e.params.harmonics)) == 16) ++full;
  }
  report(full >= kAdmissibleRequired, "admissibility_genericity",
         std::to_string(full) + "/50 amplitude draws reach rank 16 (need " + std::to_string(kAdmissibleRequired) + ")");
}

void reference_structure(const CnotExperiment& e) {
  double worst_end = 0.0, worst_reflect = 0.0;
  for (int p = 0; p < 10; ++p) {
    const AmplitudeVector a = deterministic_draw(e, kSeed + 1, static_cast<std::uint64_t>(p));
    const auto grid = integrate_reference(e.sys, a, e.params.period, e.goal1, kSteps);
    worst_end = std::max(worst_end, frobenius_norm(grid.back().matrix() - e.goal1.matrix()));
    for (int i = 0; i <= kSteps; ++i) {
      worst_reflect = std::max(worst_reflect, frobenius_norm(grid[i].matrix() - grid[kSteps - i].matrix()));
    }
  }
  report(worst_end <= kReferenceTol && worst_reflect <= kReferenceTol, "reference_structure",
         "max |Xbar(T)-Xgoal| " + fmt(worst_end) + ", max |Xbar(t)-Xbar(T-t)| " + fmt(worst_reflect));
}

void lyapunov_formula() {
  SeedState rng = stream(kSeed, 0, 0, StreamTag::kTest);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> theta;
    for (int j = 0; j < 4; ++j) theta.push_back(-3.0 + 6.0 * rng.next_unit());
    const ComplexMatrix q = oracle::random_unitary(rng, 4);
    const UnitaryMatrix x = UnitaryMatrix::from(oracle::with_phases(q, theta), 1e-12);
    double tan_sum = 0.0;
    for (double t : theta) tan_sum += std::pow(std::tan(0.5 * t), 2);
    worst = std::max({worst, std::abs(lyapunov(x) - lyapunov_from_eigenphases(x)), std::abs(lyapunov(x) - tan_sum)});
  }
  report(worst <= kLyapunovFormulaTol, "lyapunov_formula", "max |Tr(YY^H) - sum tan^2| over 100 unitaries " + fmt(worst));
}

void richardson(const CnotExperiment& e) {
  const AmplitudeVector amps = deterministic_draw(e, kSeed, 0);
  std::vector<ComplexMatrix> ends;
  for (int steps : {2048, 4096, 8192}) {
    const RunConfig c = cnot_run_config(e, e.goal1, FixedAmplitudes{amps}, 1, steps);
    ends.push_back(closed_loop_period(TrajectoryPair{e.goal1, UnitaryMatrix::identity(4), 0.0}, amps, c).state.x.matrix());
  }
  const double ratio = frobenius_norm(ends[0] - ends[1]) / frobenius_norm(ends[1] - ends[2]);
  report(ratio >= kRichardsonLo && ratio <= kRichardsonHi, "integrator_order",
         "Richardson ratio " + fmt(ratio) + " (steps 2048/4096/8192)");
}

void ten_period_criteria(const CnotExperiment& e, std::vector<double>& defects) {
  std::vector<RunOutcome> det, stoch;
  for (int p = 0; p < kRuns; ++p) {
    const auto id = static_cast<std::uint64_t>(p);
    det.push_back(execute(cnot_run_config(e, e.goal1, FixedAmplitudes{deterministic_draw(e, kSeed, id)}, 10, kSteps)));
    stoch.push_back(execute(cnot_run_config(
        e, e.goal1, StochasticAmplitudes{e.params.stochastic_a_max, kSeed, id, std::nullopt}, 10, kSteps)));
  }
  for (const auto* set : {&det, &stoch}) {
    for (const auto& r : *set) defects.push_back(r.ok ? r.max_defect : std::numeric_limits<double>::infinity());
  }

  // Monotonicity on the first 20 of each.
  double worst = 0.0;
  int broken = 0;
  for (int p = 0; p < 20; ++p) {
    for (const auto* r : {&det[p], &stoch[p]}) {
      if (!r->ok) {
        ++broken;
        continue;
      }
      worst = std::max(worst, r->max_increase);
      if (r->max_increase > kMonotonicityTol) ++broken;
    }
  }
  report(broken == 0, "lyapunov_monotonicity",
         "20+20 runs, max V increase " + fmt(worst) + ", violating runs " + std::to_string(broken));

  auto converged = [](const RunOutcome& r) { return r.ok && r.final_error < kConvergenceFactor * r.initial_error; };
  const auto det_conv = std::count_if(det.begin(), det.end(), converged);
  const auto stoch_conv = std::count_if(stoch.begin(), stoch.end(), converged);
  std::vector<double> det_ratio;
  for (const auto& r : det) det_ratio.push_back(r.ok ? r.final_error / r.initial_error : std::nan(""));
  report(det_conv >= kDetConvergedRequired && stoch_conv >= kStochConvergedRequired, "convergence_10T",
         "deterministic " + std::to_string(det_conv) + "/50 (need " + std::to_string(kDetConvergedRequired) +
             ", median ratio " + fmt(median(det_ratio)) + "), stochastic " + std::to_string(stoch_conv) + "/50 (need " +
             std::to_string(kStochConvergedRequired) + ")");

  auto exponential = [](const RunOutcome& r) {
    if (!r.ok) return false;
    try {
      const RateFit f = rate_fit(r.lyapunov, kRateTail);
      return f.slope < 0.0 && f.r_squared >= kRateMinR2;
    } catch (const InsufficientData&) {
      return false;
    }
  };
  const auto det_rate = std::count_if(det.begin(), det.end(), exponential);
  const auto stoch_rate = std::count_if(stoch.begin(), stoch.end(), exponential);
  report(det_rate >= kDetRateRequired && stoch_rate >= kStochRateRequired, "exponential_rate",
         "slope<0 and R^2>=0.9: deterministic " + std::to_string(det_rate) + "/50, stochastic " +
             std::to_string(stoch_rate) + "/50");
}

void monte_carlo_criteria(const CnotExperiment& e, std::vector<double>& defects) {
  MonteCarloOptions opts;
  opts.n_runs = kRuns;
  opts.n_periods = 25;
  opts.steps_per_period = kSteps;
  opts.seed = kSeed;
  opts.threads = configured_threads();
  const MonteCarloReport r = monte_carlo(e, opts);
  for (const auto& rec : r.runs) {
    for (const auto* g : {&rec.goal1, &rec.goal2}) {
      defects.push_back(g->det_error ? std::numeric_limits<double>::infinity() : g->det_max_unitarity_defect);
      defects.push_back(g->stoch_error ? std::numeric_limits<double>::infinity() : g->stoch_max_unitarity_defect);
    }
  }
  const auto& g1 = r.goal1;
  const bool median_ok = g1.stochastic.median <= g1.deterministic.median;
  const bool spread_ok = g1.stochastic.max <= kSpreadFactor * g1.deterministic.min;
  report(median_ok && spread_ok && g1.deterministic.completed == kRuns && g1.stochastic.completed == kRuns,
         "stochastic_advantage",
         "25T goal1 medians det " + fmt(g1.deterministic.median) + " stoch " + fmt(g1.stochastic.median) +
             "; max stoch " + fmt(g1.stochastic.max) + " vs 10x min det " + fmt(kSpreadFactor * g1.deterministic.min));
}

void two_step(const CnotExperiment& e) {
  const UnitaryMatrix goal = cnot_gate();
  const AmplitudeVector amps = deterministic_draw(e, kSeed, 0);
  RunConfig c = cnot_run_config(e, goal, FixedAmplitudes{amps}, kTwoStepPeriods, kSteps);

  bool direct_rejected = false;
  try {
    run(c);
  } catch (const NotInW&) {
    direct_rejected = true;
  } catch (const Error&) {
  }

  std::string detail = std::string("direct ") + (direct_rejected ? "NotInW" : "did not raise NotInW");
  bool two_ok = false, shift_ok = false;
  c.strategy = Strategy::kTwoStep;
  try {
    const RunLog log = run(c);
    const double err = log.period_samples.back().error;
    two_ok = err < kTwoStepErrorBound;
    detail += ", two_step error " + fmt(err) + " (switch at " + std::to_string(log.switch_period.value_or(-1)) + ")";
  } catch (const Error& ex) {
    detail += ", two_step " + ex.kind();
  }
  c.strategy = Strategy::kPhaseShifted;
  try {
    const RunLog log = run(c);
    const double err = log.period_samples.back().error;
    shift_ok = err < kTwoStepErrorBound;
    detail += ", phase_shifted error " + fmt(err) + " (phi " + fmt(log.phase_shift) + ")";
  } catch (const Error& ex) {
    detail += ", phase_shifted " + ex.kind();
  }
  report(direct_rejected && two_ok && shift_ok, "two_step_globality", detail);
}

void q_diagnostic(const CnotExperiment& e) {
  const double q_id = empirical_Q(e, UnitaryMatrix::identity(4), kQSamples, kSeed, kSteps);

  // X_hat = Q diag(exp(i s d)) Q^H with s chosen so that ||X_hat - I||_F = 0.5.
  SeedState rng = stream(kSeed, 1, 0, StreamTag::kTest);
  const ComplexMatrix q = oracle::random_unitary(rng, 4);
  const std::vector<double> dir = {0.4, -0.2, 0.1, -0.3};
  auto offset = [&](double s) {
    double sum = 0.0;
    for (double d : dir) sum += 4.0 * std::pow(std::sin(0.5 * s * d), 2);
    return std::sqrt(sum);
  };
  double lo = 0.0, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (offset(mid) < kQOffset ? lo : hi) = mid;
  }
  std::vector<double> theta;
  for (double d : dir) theta.push_back(lo * d);
  const UnitaryMatrix x_hat = UnitaryMatrix::from(oracle::with_phases(q, theta), 1e-12);

  const std::vector<double> samples = q_samples(e, x_hat, kQSamples, kSeed, kSteps);
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= samples.size();

  SeedState boot = stream(kSeed, 2, 0, StreamTag::kTest);
  std::vector<double> means;
  means.reserve(kBootstrapResamples);
  for (int b = 0; b < kBootstrapResamples; ++b) {
    double m = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      m += samples[static_cast<std::size_t>(boot.next_unit() * samples.size())];
    }
    means.push_back(m / samples.size());
  }
  std::sort(means.begin(), means.end());
  const double lower = means[static_cast<std::size_t>(0.025 * kBootstrapResamples)];

  report(std::abs(q_id) <= kQIdentityBound && lower > 0.0, "q_diagnostic",
         "Q(I) " + fmt(q_id) + "; Q at |X-I|=" + fmt(frobenius_norm(x_hat.matrix() - ComplexMatrix::Identity(4, 4))) +
             ": mean " + fmt(mean) + ", 95% bootstrap lower bound " + fmt(lower));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const CnotExperiment e = build_cnot_system();
  std::vector<double> defects;

  controllability();
  admissibility(e);
  reference_structure(e);
  lyapunov_formula();
  richardson(e);
  ten_period_criteria(e, defects);
  monte_carlo_criteria(e, defects);
  const double worst_defect = *std::max_element(defects.begin(), defects.end());
  report(worst_defect <= kUnitarityBound, "unitarity_preservation",
         std::to_string(defects.size()) + " runs up to 25T, max |X^H X - I| " + fmt(worst_defect));
  two_step(e);
  q_diagnostic(e);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 12 criteria failed (%.0f s)\n", failures, secs);
  return std::min(failures, 125);
}
