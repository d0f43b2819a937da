#include "stabilizer/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "stabilizer/errors.hpp"
#include "stabilizer/rng.hpp"

namespace stabilizer {

namespace {

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Runs fn(0..count-1) on up to `threads` workers.
template <typename Fn>
void parallel_for(int count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Outcome {
  double final_error = std::numeric_limits<double>::quiet_NaN();
  double max_defect = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::string> error;
};

Outcome run_outcome(const RunConfig& config) {
  Outcome out;
  try {
    const RunLog log = run(config);
    out.final_error = log.period_samples.back().error;
    out.max_defect = 0.0;
    for (const auto& s : log.period_samples) {
      out.max_defect = std::max(out.max_defect, s.unitarity_defect);
    }
  } catch (const Error& e) {
    out.error = e.kind() + ": " + e.what();
  }
  return out;
}

StrategySummary summarize(const std::vector<double>& values) {
  StrategySummary s;
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  s.completed = static_cast<int>(finite.size());
  s.median = median(finite);
  if (finite.empty()) {
    s.min = s.max = std::numeric_limits<double>::quiet_NaN();
  } else {
    const auto [lo, hi] = std::minmax_element(finite.begin(), finite.end());
    s.min = *lo;
    s.max = *hi;
  }
  return s;
}

}  // namespace

std::vector<ComplexMatrix> cnot_hamiltonians() {
  using namespace std::complex_literals;
  ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  sy << 0.0, -1i, 1i, 0.0;
  sz << 1.0, 0.0, 0.0, -1.0;
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  return {kron(sx, id),
          kron(id, sx),
          kron(sy, id),
          kron(id, sy),
          kron(sx, sx) + kron(sy, sy) + kron(sz, sz),
          kron(id, id)};
}

UnitaryMatrix cnot_gate() {
  ComplexMatrix c = ComplexMatrix::Zero(4, 4);
  c(0, 0) = 1.0;
  c(1, 1) = 1.0;
  c(2, 3) = 1.0;
  c(3, 2) = 1.0;
  return UnitaryMatrix::from(std::move(c));
}

CnotExperiment build_cnot_system() {
  std::vector<SkewHermitianMatrix> generators;
  for (const auto& h : cnot_hamiltonians()) {
    generators.push_back(SkewHermitianMatrix::from_hamiltonian(h));
  }
  ComplexMatrix g2 = ComplexMatrix::Zero(4, 4);
  g2(0, 0) = 1.0;
  g2(1, 2) = -1.0;
  g2(2, 1) = 1.0;
  g2(3, 3) = 1.0;
  return CnotExperiment{SystemDef(std::move(generators)),
                        UnitaryMatrix::from(Complex(0.0, 1.0) * cnot_gate().matrix()),
                        UnitaryMatrix::from(std::move(g2)), CnotParameters{}};
}

RunConfig cnot_run_config(const CnotExperiment& experiment, const UnitaryMatrix& goal,
                          AmplitudeMode mode, int n_periods, int steps_per_period) {
  const auto& p = experiment.params;
  RunConfig config{
      .sys = experiment.sys,
      .period = p.period,
      .harmonics = p.harmonics,
      .amps_mode = std::move(mode),
      .gains = FeedbackGains::uniform(experiment.sys.m(), p.gain),
      .x0 = UnitaryMatrix::identity(experiment.sys.n()),
      .x_goal = goal,
      .n_periods = n_periods,
      .steps_per_period = steps_per_period,
  };
  return config;
}

AmplitudeVector deterministic_draw(const CnotExperiment& experiment, std::uint64_t seed,
                                   std::uint64_t run) {
  SeedState state = stream(seed, run, 0, StreamTag::kDeterministicDraw);
  return sample_amplitudes_symmetric(state, experiment.sys.m(), experiment.params.harmonics,
                                     experiment.params.a_max);
}

MonteCarloReport monte_carlo(const CnotExperiment& experiment, const MonteCarloOptions& options) {
  if (options.n_runs < 1) throw std::invalid_argument("monte_carlo: n_runs must be >= 1");
  const int n = options.n_runs;

  std::vector<MonteCarloRecord> records;
  records.reserve(n);
  for (int p = 0; p < n; ++p) {
    records.push_back(MonteCarloRecord{
        p, deterministic_draw(experiment, options.seed, static_cast<std::uint64_t>(p)), {}, {}});
  }

  // Four independent jobs per run: (goal, strategy).
  parallel_for(4 * n, options.threads, [&](int job) {
    MonteCarloRecord& rec = records[job / 4];
    const bool second_goal = (job % 4) >= 2;
    const bool stochastic = (job % 2) == 1;
    const UnitaryMatrix& goal = second_goal ? experiment.goal2 : experiment.goal1;

    AmplitudeMode mode = FixedAmplitudes{rec.amps};
    if (stochastic) {
      StochasticAmplitudes s{experiment.params.stochastic_a_max, options.seed,
                             static_cast<std::uint64_t>(rec.p), std::nullopt};
      if (options.pin_first_draw) s.first_draw = rec.amps;
      mode = s;
    }
    const Outcome out = run_outcome(
        cnot_run_config(experiment, goal, mode, options.n_periods, options.steps_per_period));

    GoalOutcome& g = second_goal ? rec.goal2 : rec.goal1;
    if (stochastic) {
      g.stoch_final_error = out.final_error;
      g.stoch_max_unitarity_defect = out.max_defect;
      g.stoch_error = out.error;
    } else {
      g.det_final_error = out.final_error;
      g.det_max_unitarity_defect = out.max_defect;
      g.det_error = out.error;
    }
    if (job % 4 == 3 && options.on_run_done) options.on_run_done(rec.p);
  });

  MonteCarloReport report;
  std::vector<double> d1, s1, d2, s2;
  for (const auto& rec : records) {
    d1.push_back(rec.goal1.det_final_error);
    s1.push_back(rec.goal1.stoch_final_error);
    d2.push_back(rec.goal2.det_final_error);
    s2.push_back(rec.goal2.stoch_final_error);
  }
  report.goal1 = GoalSummary{summarize(d1), summarize(s1)};
  report.goal2 = GoalSummary{summarize(d2), summarize(s2)};
  report.runs = std::move(records);
  return report;
}

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

// ---------------------------------------------------------------------------

RateFit rate_fit(const std::vector<double>& lyapunov, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("rate_fit: tail_fraction must lie in (0, 1]");
  }
  const auto n = static_cast<int>(lyapunov.size());
  const int tail = static_cast<int>(std::ceil(tail_fraction * n - 1e-12));
  if (tail < 5) {
    std::ostringstream os;
    os << "rate_fit needs at least 5 tail samples, got " << tail;
    throw InsufficientData(os.str());
  }

  std::vector<double> xs, ys;
  for (int j = n - tail; j < n; ++j) {
    if (lyapunov[j] > 1e-14) {
      xs.push_back(j);
      ys.push_back(std::log(lyapunov[j]));
    }
  }
  RateFit fit;
  fit.samples = static_cast<int>(xs.size());
  if (fit.samples < 5) {
    fit.slope = -std::numeric_limits<double>::infinity();
    fit.r_squared = 1.0;
    fit.underflow = true;
    return fit;
  }

  const double k = fit.samples;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < fit.samples; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < fit.samples; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

RateFit rate_fit(const RunLog& log, double tail_fraction) {
  std::vector<double> v;
  v.reserve(log.period_samples.size());
  for (const auto& s : log.period_samples) v.push_back(s.lyapunov);
  return rate_fit(v, tail_fraction);
}

// ---------------------------------------------------------------------------

std::vector<double> q_samples(const CnotExperiment& experiment, const UnitaryMatrix& x_hat,
                              int n_samples, std::uint64_t seed, int steps_per_period) {
  if (n_samples < 1) throw std::invalid_argument("q_samples: n_samples must be >= 1");
  const auto& p = experiment.params;
  const UnitaryMatrix id = UnitaryMatrix::identity(experiment.sys.n());
  const RunConfig config =
      cnot_run_config(experiment, id, FixedAmplitudes{AmplitudeVector(experiment.sys.m(), p.harmonics)},
                      1, steps_per_period);
  const double v0 = lyapunov(x_hat, config.singular_tol);

  std::vector<double> out(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    SeedState state = stream(seed, static_cast<std::uint64_t>(i), 0, StreamTag::kQSample);
    const AmplitudeVector amps =
        sample_amplitudes(state, experiment.sys.m(), p.harmonics, p.stochastic_a_max);
    const PeriodResult res = closed_loop_period(TrajectoryPair{id, x_hat, 0.0}, amps, config);
    out[i] = v0 - res.lyapunov_end;
  }
  return out;
}

double empirical_Q(const CnotExperiment& experiment, const UnitaryMatrix& x_hat, int n_samples,
                   std::uint64_t seed, int steps_per_period) {
  const std::vector<double> q = q_samples(experiment, x_hat, n_samples, seed, steps_per_period);
  double sum = 0.0;
  for (double v : q) sum += v;
  return sum / static_cast<double>(q.size());
}

unsigned configured_threads() {
  const char* env = std::getenv("STABILIZER_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long value = std::strtoul(env, &end, 10);
  if (end == env || *end != '\0') return 0;
  return static_cast<unsigned>(value);
}

}  // namespace stabilizer
