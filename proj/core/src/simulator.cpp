#include "stabilizer/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stabilizer/errors.hpp"
#include "stabilizer/rng.hpp"

namespace stabilizer {

void RunConfig::validate() const {
  if (!(period > 0.0)) throw std::invalid_argument("period T must be positive");
  if (harmonics < 1) throw std::invalid_argument("harmonics M must be >= 1");
  if (n_periods < 1) throw std::invalid_argument("n_periods must be >= 1");
  if (steps_per_period < 16) throw std::invalid_argument("steps_per_period must be >= 16");
  if (dense_decimation < 1) throw std::invalid_argument("dense_decimation must be >= 1");
  if (x0.dim() != sys.n() || x_goal.dim() != sys.n()) {
    throw std::invalid_argument("initial and goal matrices must match the system dimension");
  }
  if (gains.size() != sys.m()) throw std::invalid_argument("one feedback gain per control");
  if (const auto* fixed = std::get_if<FixedAmplitudes>(&amps_mode)) {
    if (fixed->amps.controls() != sys.m() || fixed->amps.harmonics() != harmonics) {
      throw std::invalid_argument("fixed amplitudes must be m x M");
    }
  } else {
    const auto& stochastic = std::get<StochasticAmplitudes>(amps_mode);
    if (!(stochastic.a_max > 0.0)) throw std::invalid_argument("a_max must be positive");
    if (stochastic.first_draw && (stochastic.first_draw->controls() != sys.m() ||
                                  stochastic.first_draw->harmonics() != harmonics)) {
      throw std::invalid_argument("pinned first draw must be m x M");
    }
  }
}

AmplitudeVector amplitudes_for_period(const RunConfig& config, int j) {
  if (const auto* fixed = std::get_if<FixedAmplitudes>(&config.amps_mode)) return fixed->amps;
  const auto& stochastic = std::get<StochasticAmplitudes>(config.amps_mode);
  if (j == 0 && stochastic.first_draw) return *stochastic.first_draw;
  SeedState state = stream(stochastic.seed, stochastic.run_id, static_cast<std::uint64_t>(j),
                           StreamTag::kStochasticPeriod);
  return sample_amplitudes(state, config.sys.m(), config.harmonics, stochastic.a_max);
}

// ---------------------------------------------------------------------------

std::vector<UnitaryMatrix> integrate_reference(const SystemDef& sys, const AmplitudeVector& amps,
                                               double period, const UnitaryMatrix& x_init,
                                               int steps) {
  if (steps < 16) throw std::invalid_argument("integrate_reference: steps must be >= 16");
  if (!(period > 0.0)) throw std::invalid_argument("integrate_reference: period must be positive");
  const double h = period / steps;
  std::vector<UnitaryMatrix> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  grid.push_back(x_init);
  ComplexMatrix x = x_init.matrix();
  for (int i = 0; i < steps; ++i) {
    const Eigen::VectorXd u = reference_control(amps, period, (i + 0.5) * h);
    x = expm_skew_unchecked(sys.combine(u), h).matrix() * x;
    grid.push_back(UnitaryMatrix::trusted(x));
  }
  const double defect = unitarity_defect(x);
  if (defect > kUnitarityTol) {
    std::ostringstream os;
    os << "reference trajectory drifted off U(n): " << defect;
    throw IntegratorTolerance(os.str());
  }
  return grid;
}

namespace {

ComplexMatrix keep_unitary(const ComplexMatrix& x, double tol, const char* what) {
  if (unitarity_defect(x) <= tol / 10.0) return x;
  ComplexMatrix fixed = UnitaryMatrix::trusted(x).reprojected().matrix();
  const double defect = unitarity_defect(fixed);
  if (defect > tol) {
    std::ostringstream os;
    os << what << " drifted off U(n) beyond repair: " << defect;
    throw IntegratorTolerance(os.str());
  }
  return fixed;
}

}  // namespace

PeriodResult closed_loop_period(const TrajectoryPair& state, const AmplitudeVector& amps,
                                const RunConfig& config) {
  const SystemDef& sys = config.sys;
  const auto& generators = sys.generators();
  const int steps = config.steps_per_period;
  const double period = config.period;
  const double h = period / steps;

  ComplexMatrix x_bar = state.x_bar.matrix();
  ComplexMatrix x = state.x.matrix();

  PeriodResult result{.state = state, .dense = {}, .controls = {}};
  FeedbackEvaluation left = evaluate_feedback(x_bar, x, generators, config.gains,
                                              config.singular_tol);
  result.lyapunov_start = left.lyapunov;
  double previous = left.lyapunov;
  if (config.record_controls) result.controls.reserve(steps);

  for (int i = 0; i < steps; ++i) {
    const double tau = i * h;
    const Eigen::VectorXd u_ref = reference_control(amps, period, tau);
    const Eigen::VectorXd u = u_ref + left.feedback;
    if (i % config.dense_decimation == 0) {
      result.dense.push_back(DenseSample{state.t + tau, u.norm(), left.lyapunov});
    }

    // Predictor: half step with the left-endpoint controls.
    const ComplexMatrix x_bar_half = expm_skew_unchecked(sys.combine(u_ref), 0.5 * h).matrix() * x_bar;
    const ComplexMatrix x_half = expm_skew_unchecked(sys.combine(u), 0.5 * h).matrix() * x;
    const FeedbackEvaluation mid = evaluate_feedback(x_bar_half, x_half, generators, config.gains,
                                                     config.singular_tol);
    const Eigen::VectorXd u_ref_mid = reference_control(amps, period, tau + 0.5 * h);
    const Eigen::VectorXd u_mid = u_ref_mid + mid.feedback;

    x_bar = expm_skew_unchecked(sys.combine(u_ref_mid), h).matrix() * x_bar;
    x = expm_skew_unchecked(sys.combine(u_mid), h).matrix() * x;
    if (config.record_controls) result.controls.push_back(u_mid);

    left = evaluate_feedback(x_bar, x, generators, config.gains, config.singular_tol);
    const double increase = left.lyapunov - previous;
    result.max_lyapunov_increase = std::max(result.max_lyapunov_increase, increase);
    if (increase > config.monotonicity_tol) {
      std::ostringstream os;
      os << "Lyapunov function increased by " << increase << " at t = " << state.t + tau + h;
      throw IntegratorTolerance(os.str());
    }
    previous = left.lyapunov;
  }

  x_bar = keep_unitary(x_bar, config.unitarity_tol, "reference trajectory");
  x = keep_unitary(x, config.unitarity_tol, "plant trajectory");
  result.state = TrajectoryPair{UnitaryMatrix::trusted(std::move(x_bar)),
                                UnitaryMatrix::trusted(std::move(x)), state.t + period};
  result.lyapunov_end = lyapunov(result.state.tracking_error(), config.singular_tol);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

void require_in_w(const UnitaryMatrix& relative, double singular_tol, const char* what) {
  const double margin = cayley_margin(relative);
  if (!(margin > singular_tol)) {
    std::ostringstream os;
    os << what << " has an eigenvalue within " << margin << " of -1";
    throw NotInW(os.str());
  }
}

PeriodSample make_sample(int j, const TrajectoryPair& st, const UnitaryMatrix& error_goal,
                         double singular_tol, int phase) {
  PeriodSample s{j, st.t, st.x, 0.0, 0.0, 0.0, phase};
  s.lyapunov = lyapunov(st.tracking_error(), singular_tol);
  s.error = frobenius_norm(st.x.matrix() - error_goal.matrix());
  s.unitarity_defect = unitarity_defect(st.x.matrix());
  return s;
}

void advance(const RunConfig& config, TrajectoryPair& st, int j, RunLog& log) {
  AmplitudeVector amps = amplitudes_for_period(config, j);
  PeriodResult res = closed_loop_period(st, amps, config);
  log.max_lyapunov_increase = std::max(log.max_lyapunov_increase, res.max_lyapunov_increase);
  log.dense_samples.insert(log.dense_samples.end(), res.dense.begin(), res.dense.end());
  if (config.record_controls) {
    log.applied_controls.insert(log.applied_controls.end(),
                                std::make_move_iterator(res.controls.begin()),
                                std::make_move_iterator(res.controls.end()));
  }
  log.amps_history.push_back(std::move(amps));
  st = std::move(res.state);
}

RunLog direct_toward(const RunConfig& config, const UnitaryMatrix& goal) {
  config.validate();
  require_in_w(goal * config.x0.adjoint(), config.singular_tol, "X_goal X0^H");

  RunLog log;
  log.step = config.period / config.steps_per_period;
  log.effective_goal = goal;
  TrajectoryPair st{goal, config.x0, 0.0};
  log.period_samples.push_back(make_sample(0, st, goal, config.singular_tol, 0));
  for (int j = 0; j < config.n_periods; ++j) {
    advance(config, st, j, log);
    log.period_samples.push_back(make_sample(j + 1, st, goal, config.singular_tol, 0));
  }
  return log;
}

}  // namespace

RunLog run_direct(const RunConfig& config) { return direct_toward(config, config.x_goal); }

RunLog run(const RunConfig& config) {
  switch (config.strategy) {
    case Strategy::kDirect:
      return run_direct(config);
    case Strategy::kTwoStep:
      return two_step_run(config);
    case Strategy::kPhaseShifted: {
      config.validate();
      const PhaseShift shift = phase_shift_select(config.x_goal * config.x0.adjoint());
      const UnitaryMatrix goal = UnitaryMatrix::trusted(std::polar(1.0, shift.phi) *
                                                        config.x_goal.matrix());
      RunLog log = direct_toward(config, goal);
      log.phase_shift = shift.phi;
      return log;
    }
  }
  throw std::logic_error("unknown strategy");
}

UnitaryMatrix two_step_plan(const UnitaryMatrix& x0, const UnitaryMatrix& x_goal) {
  const UnitaryMatrix w = x_goal * x0.adjoint();
  const UnitaryEigenDecomposition dec = eig_unitary(w);
  const auto n = static_cast<Eigen::Index>(dec.eigenphases.size());
  Eigen::VectorXcd half(n);
  for (Eigen::Index j = 0; j < n; ++j) half(j) = std::polar(1.0, 0.5 * dec.eigenphases[j]);
  const ComplexMatrix& u = dec.eigenvectors.matrix();
  const UnitaryMatrix w1 = UnitaryMatrix::trusted(u.adjoint() * half.asDiagonal() * u);
  return w1 * x0;
}

RunLog two_step_run(const RunConfig& config) {
  if (config.strategy != Strategy::kTwoStep) {
    throw std::invalid_argument("two_step_run requires strategy two_step");
  }
  config.validate();
  const UnitaryMatrix x1 = two_step_plan(config.x0, config.x_goal);

  RunLog log;
  log.step = config.period / config.steps_per_period;
  log.intermediate_goal = x1;
  log.effective_goal = config.x_goal;

  auto switch_ready = [&](const UnitaryMatrix& x) {
    if (frobenius_norm(x.matrix() - x1.matrix()) > config.two_step.switch_tol) return false;
    const auto phases = eig_unitary(config.x_goal * x.adjoint()).eigenphases;
    return std::all_of(phases.begin(), phases.end(), [&](double theta) {
      return kPi - std::abs(theta) >= config.two_step.switch_margin;
    });
  };

  TrajectoryPair st{x1, config.x0, 0.0};
  log.period_samples.push_back(make_sample(0, st, config.x_goal, config.singular_tol, 1));

  int j = 0;
  while (!switch_ready(st.x)) {
    if (j == config.n_periods) {
      std::ostringstream os;
      os << "two-step switch predicate never held within " << config.n_periods << " periods";
      throw SwitchNeverReached(os.str());
    }
    advance(config, st, j, log);
    ++j;
    log.period_samples.push_back(make_sample(j, st, config.x_goal, config.singular_tol, 1));
  }
  log.switch_period = j;

  st.x_bar = config.x_goal;
  for (; j < config.n_periods; ++j) {
    advance(config, st, j, log);
    log.period_samples.push_back(make_sample(j + 1, st, config.x_goal, config.singular_tol, 2));
  }
  return log;
}

PhaseShift phase_shift_select(const UnitaryMatrix& x_goal) {
  std::vector<double> phases = eig_unitary(x_goal).eigenphases;
  std::sort(phases.begin(), phases.end());
  std::vector<double> distinct;
  for (double p : phases) {
    if (distinct.empty() || p - distinct.back() > 1e-9) distinct.push_back(p);
  }
  if (distinct.size() > 1 && distinct.front() + 2.0 * kPi - distinct.back() <= 1e-9) {
    distinct.pop_back();
  }

  // Every circular gap (a, b) yields a candidate phi = pi - (a + b) / 2 with
  // min distance from pi equal to (b - a) / 2.
  double best_gap = -1.0;
  double best_phi = 0.0;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    const double a = distinct[i];
    const double b = (i + 1 < distinct.size()) ? distinct[i + 1] : distinct.front() + 2.0 * kPi;
    const double gap = b - a;
    const double phi = wrap_phase(kPi - 0.5 * (a + b));
    const bool wider = gap > best_gap + 1e-9;
    const bool tied = std::abs(gap - best_gap) <= 1e-9;
    const bool preferred = std::abs(phi) < std::abs(best_phi) - 1e-12 ||
                           (std::abs(std::abs(phi) - std::abs(best_phi)) <= 1e-12 && phi > best_phi);
    if (wider || (tied && preferred)) {
      best_gap = std::max(gap, best_gap);
      best_phi = phi;
    }
  }
  return PhaseShift{best_phi,
                    UnitaryMatrix::trusted(std::polar(1.0, best_phi) * x_goal.matrix())};
}

UnitaryMatrix replay_open_loop(const SystemDef& sys, const std::vector<Eigen::VectorXd>& controls,
                               double step, const UnitaryMatrix& x_init) {
  ComplexMatrix x = x_init.matrix();
  for (const auto& u : controls) x = expm_skew_unchecked(sys.combine(u), step).matrix() * x;
  return UnitaryMatrix::trusted(std::move(x));
}

}  // namespace stabilizer
