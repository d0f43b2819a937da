#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stabilizer/simulator.hpp"

namespace stabilizer {

struct CnotParameters {
  int harmonics = 4;       // M
  double a_max = 0.25;     // deterministic draws on [-a_max, a_max]
  /// a_max of the per-period stochastic law, whose draws lie on
  /// [-stochastic_a_max/2, stochastic_a_max/2].
  double stochastic_a_max = 0.5;
  double gain = 0.75;      // f_k
  double period = 25.0;    // T
};

/// Two-qubit system on U(4) with H1 = sx (x) I, H2 = I (x) sx, H3 = sy (x) I,
/// H4 = I (x) sy, H5 = sx (x) sx + sy (x) sy + sz (x) sz, H6 = I (x) I and
/// S_k = -i H_k.
struct CnotExperiment {
  SystemDef sys;
  UnitaryMatrix goal1;  // e^{i pi/2} CNOT
  UnitaryMatrix goal2;
  CnotParameters params;
};

std::vector<ComplexMatrix> cnot_hamiltonians();
CnotExperiment build_cnot_system();

/// Plain CNOT permutation matrix, which has eigenvalue -1.
UnitaryMatrix cnot_gate();

/// Run configuration for the experiment with the given goal and amplitude
/// mode, starting from X0 = I.
RunConfig cnot_run_config(const CnotExperiment& experiment, const UnitaryMatrix& goal,
                          AmplitudeMode mode, int n_periods, int steps_per_period = 4096);

/// Deterministic amplitudes a^p of Monte-Carlo run p, uniform on
/// [-a_max, a_max]^{mM}.
AmplitudeVector deterministic_draw(const CnotExperiment& experiment, std::uint64_t seed,
                                   std::uint64_t run);

struct MonteCarloOptions {
  int n_runs = 50;
  int n_periods = 25;
  int steps_per_period = 4096;
  std::uint64_t seed = 1;
  /// Pin the first stochastic draw to a^p.
  bool pin_first_draw = false;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Optional per-run progress callback (called from worker threads).
  std::function<void(int)> on_run_done;
};

struct GoalOutcome {
  double det_final_error = 0.0;
  double stoch_final_error = 0.0;
  double det_max_unitarity_defect = 0.0;
  double stoch_max_unitarity_defect = 0.0;
  std::optional<std::string> det_error;
  std::optional<std::string> stoch_error;
};

struct MonteCarloRecord {
  int p = 0;
  AmplitudeVector amps;
  GoalOutcome goal1;
  GoalOutcome goal2;
};

struct StrategySummary {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  int completed = 0;
};

struct GoalSummary {
  StrategySummary deterministic;
  StrategySummary stochastic;
};

struct MonteCarloReport {
  std::vector<MonteCarloRecord> runs;
  GoalSummary goal1;
  GoalSummary goal2;
};

/// Paired Monte Carlo: run p uses a^p for the deterministic law on both
/// goals, and one stochastic stream (seed, p) shared by both goals. Runs
/// that fail record their error instead of aborting the batch.
MonteCarloReport monte_carlo(const CnotExperiment& experiment, const MonteCarloOptions& options);

/// Median of the finite values; NaN when empty.
double median(std::vector<double> values);

struct RateFit {
  double slope = 0.0;  // per period; -inf when V underflowed
  double r_squared = 0.0;
  int samples = 0;
  bool underflow = false;
};

/// Least-squares line through (j, ln V(jT)) over the last
/// ceil(tail_fraction * N) period samples. If fewer than 5 tail samples
/// have V > 1e-14 the run converged faster than measurable and the result
/// carries slope = -inf with underflow = true. Throws InsufficientData when
/// the log has fewer than 5 tail samples at all.
RateFit rate_fit(const RunLog& log, double tail_fraction = 0.6);
RateFit rate_fit(const std::vector<double>& lyapunov, double tail_fraction = 0.6);

/// V(X_hat) - V(X_tilde(T)) for one period from X_tilde(0) = X_hat, per
/// amplitude draw on the stochastic interval. Samples are i.i.d.
std::vector<double> q_samples(const CnotExperiment& experiment, const UnitaryMatrix& x_hat,
                              int n_samples, std::uint64_t seed,
                              int steps_per_period = 4096);

/// Monte-Carlo estimate of Q(X_hat): the expected one-period decrease of V
/// over uniformly drawn amplitudes. Throws NotInW off W.
double empirical_Q(const CnotExperiment& experiment, const UnitaryMatrix& x_hat, int n_samples,
                   std::uint64_t seed, int steps_per_period = 4096);

/// Thread count from STABILIZER_THREADS (0 or unset = hardware concurrency).
unsigned configured_threads();

}  // namespace stabilizer
