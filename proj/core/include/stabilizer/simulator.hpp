#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "stabilizer/control.hpp"
#include "stabilizer/lie.hpp"
#include "stabilizer/matrix.hpp"

namespace stabilizer {

enum class Strategy { kDirect, kTwoStep, kPhaseShifted };

/// The same amplitudes in every period.
struct FixedAmplitudes {
  AmplitudeVector amps;
};

/// Fresh amplitudes per period, uniform on [-a_max/2, a_max/2]. Period j
/// draws from stream(seed, run_id, j). `first_draw`, when set, replaces the
/// period-0 draw (pairs a stochastic run with a deterministic one).
struct StochasticAmplitudes {
  double a_max = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t run_id = 0;
  std::optional<AmplitudeVector> first_draw;
};

using AmplitudeMode = std::variant<FixedAmplitudes, StochasticAmplitudes>;

struct TwoStepOptions {
  /// Required distance (rad) of every eigenphase of X_goal X(LT)^H from pi.
  double switch_margin = 0.1;
  /// Required ||X(LT) - X1||_F.
  double switch_tol = 0.3;
};

struct RunConfig {
  SystemDef sys;
  double period = 25.0;  // T
  int harmonics = 4;     // M
  AmplitudeMode amps_mode;
  FeedbackGains gains;
  UnitaryMatrix x0;
  UnitaryMatrix x_goal;
  int n_periods = 10;
  int steps_per_period = 4096;
  Strategy strategy = Strategy::kDirect;
  TwoStepOptions two_step{};
  double singular_tol = kSingularTol;
  double unitarity_tol = kUnitarityTol;
  /// A logged V may exceed its predecessor by at most this much.
  double monotonicity_tol = 1e-8;
  int dense_decimation = 16;
  /// Keep the per-substep applied controls for open-loop replay.
  bool record_controls = false;

  /// Throws std::invalid_argument on T <= 0, n_periods < 1,
  /// steps_per_period < 16, or dimension mismatches.
  void validate() const;
};

/// Reference trajectory Xbar and plant X at time t.
struct TrajectoryPair {
  UnitaryMatrix x_bar;
  UnitaryMatrix x;
  double t = 0.0;

  /// Xbar^H X.
  UnitaryMatrix tracking_error() const { return x_bar.adjoint() * x; }
};

struct PeriodSample {
  int j = 0;
  double t = 0.0;
  UnitaryMatrix x;
  double lyapunov = 0.0;
  double error = 0.0;  // ||X(jT) - X_goal||_F
  double unitarity_defect = 0.0;
  int phase = 0;  // 0 for single-phase strategies; 1 or 2 under two_step
};

struct DenseSample {
  double t = 0.0;
  double u_norm = 0.0;
  double lyapunov = 0.0;
};

struct RunLog {
  std::vector<PeriodSample> period_samples;
  std::vector<DenseSample> dense_samples;
  std::vector<AmplitudeVector> amps_history;
  std::optional<int> switch_period;
  /// Goal actually tracked in the final phase (e^{i phi} X_goal under
  /// phase_shifted).
  std::optional<UnitaryMatrix> effective_goal;
  double phase_shift = 0.0;
  std::optional<UnitaryMatrix> intermediate_goal;  // X1 under two_step
  /// Largest V(t_{i+1}) - V(t_i) over consecutive substeps.
  double max_lyapunov_increase = 0.0;
  /// Midpoint controls of every substep, when RunConfig::record_controls.
  std::vector<Eigen::VectorXd> applied_controls;
  double step = 0.0;
};

struct PeriodResult {
  TrajectoryPair state;
  double lyapunov_start = 0.0;
  double lyapunov_end = 0.0;
  double max_lyapunov_increase = 0.0;
  std::vector<DenseSample> dense;
  std::vector<Eigen::VectorXd> controls;
};

/// One period of Xbar on the uniform grid t_i = i T / steps, i = 0..steps,
/// by exponential midpoint steps. Because ubar(T - t) = -ubar(t), the
/// discrete map is exactly time-reversible and returns to X_init.
std::vector<UnitaryMatrix> integrate_reference(const SystemDef& sys, const AmplitudeVector& amps,
                                               double period, const UnitaryMatrix& x_init,
                                               int steps);

/// Advances (Xbar, X) over one period. Each substep evaluates the control at
/// the left endpoint, predicts both states to the half step, re-evaluates
/// there, and applies X <- exp(h sum_k u_k S_k) X (Xbar likewise with ubar).
/// Throws NotInW if the tracking error reaches the boundary of W and
/// IntegratorTolerance on a Lyapunov increase above monotonicity_tol or
/// unrecoverable unitarity drift.
PeriodResult closed_loop_period(const TrajectoryPair& state, const AmplitudeVector& amps,
                                const RunConfig& config);

/// Dispatches on config.strategy.
RunLog run(const RunConfig& config);

/// Direct strategy: tracks X_goal from X0. Throws NotInW unless
/// X_goal X0^H is in W.
RunLog run_direct(const RunConfig& config);

/// X1 = W1 X0 where W1 = U^H diag(exp(i theta_j / 2)) U and
/// X_goal X0^H = U^H diag(exp(i theta_j)) U. Both X1 X0^H and X_goal X1^H
/// equal W1, whose eigenphases lie in (-pi/2, pi/2].
UnitaryMatrix two_step_plan(const UnitaryMatrix& x0, const UnitaryMatrix& x_goal);

/// Phase one tracks X1 until X_goal X(LT)^H has every eigenphase at least
/// switch_margin from pi and ||X(LT) - X1|| <= switch_tol; phase two then
/// tracks X_goal from X(LT). Throws SwitchNeverReached if the predicate
/// never holds within n_periods.
RunLog two_step_run(const RunConfig& config);

struct PhaseShift {
  double phi = 0.0;
  UnitaryMatrix shifted_goal;
};

/// Picks phi so that the eigenphases of e^{i phi} X_goal stay as far from pi
/// as possible: pi is moved to the middle of the widest circular gap of the
/// spectrum. Ties go to the smallest |phi|, then to positive phi.
PhaseShift phase_shift_select(const UnitaryMatrix& x_goal);

/// Applies recorded per-substep controls open loop from x_init.
UnitaryMatrix replay_open_loop(const SystemDef& sys, const std::vector<Eigen::VectorXd>& controls,
                               double step, const UnitaryMatrix& x_init);

/// Amplitudes used in period j of a run.
AmplitudeVector amplitudes_for_period(const RunConfig& config, int j);

}  // namespace stabilizer
