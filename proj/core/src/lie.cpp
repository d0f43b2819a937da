#include "stabilizer/lie.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "stabilizer/control.hpp"
#include "stabilizer/errors.hpp"

namespace stabilizer {

SystemDef::SystemDef(std::vector<SkewHermitianMatrix> generators)
    : n_(0), generators_(std::move(generators)) {
  if (generators_.empty()) throw InvariantViolation("system needs at least one generator");
  n_ = generators_.front().dim();
  for (const auto& s : generators_) {
    if (s.dim() != n_) throw InvariantViolation("generators must share one dimension");
  }
}

ComplexMatrix SystemDef::combine(const Eigen::VectorXd& u) const {
  ComplexMatrix a = ComplexMatrix::Zero(n_, n_);
  for (int k = 0; k < m(); ++k) a += u(k) * generators_[k].matrix();
  return a;
}

Eigen::VectorXd real_vectorize(const ComplexMatrix& a) {
  const Eigen::Index size = a.size();
  Eigen::VectorXd v(2 * size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v(i) = a.data()[i].real();
    v(size + i) = a.data()[i].imag();
  }
  return v;
}

int real_span_rank(std::span<const ComplexMatrix> elements, double rel_tol) {
  if (elements.empty()) return 0;
  const Eigen::Index rows = 2 * elements.front().size();
  Eigen::MatrixXd stacked(rows, static_cast<Eigen::Index>(elements.size()));
  for (std::size_t c = 0; c < elements.size(); ++c) {
    stacked.col(static_cast<Eigen::Index>(c)) = real_vectorize(elements[c]);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(stacked);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double threshold = rel_tol * sigma(0);
  return static_cast<int>((sigma.array() > threshold).count());
}

// ---------------------------------------------------------------------------

namespace {

// Incremental real Gram-Schmidt over vectorized matrices.
class SpanTracker {
 public:
  SpanTracker(Eigen::Index dim, double rel_tol) : rel_tol_(rel_tol), q_(dim, 0) {}

  // Returns the unit-norm element if `candidate` is independent of the span.
  std::optional<ComplexMatrix> try_add(const ComplexMatrix& candidate, double scale) {
    const double norm = candidate.norm();
    if (!(norm > 1e-12 * std::max(1.0, scale))) return std::nullopt;
    Eigen::VectorXd v = real_vectorize(candidate) / norm;
    for (int pass = 0; pass < 2 && q_.cols() > 0; ++pass) {
      v -= q_ * (q_.transpose() * v);
    }
    const double residual = v.norm();
    if (!(residual > rel_tol_)) return std::nullopt;
    q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
    q_.col(q_.cols() - 1) = v / residual;
    return ComplexMatrix(candidate / norm);
  }

  Eigen::Index rank() const { return q_.cols(); }

 private:
  double rel_tol_;
  Eigen::MatrixXd q_;
};

}  // namespace

BracketClosureReport lie_closure(const SystemDef& sys, int max_depth, double rank_tol) {
  if (max_depth < 0) throw std::invalid_argument("lie_closure: max_depth must be >= 0");
  const int n = sys.n();
  const Eigen::Index full = static_cast<Eigen::Index>(n) * n;

  BracketClosureReport report;
  SpanTracker global(2 * full, rank_tol);
  std::vector<ComplexMatrix> kept;

  // Basis of the span of all brackets nested exactly `depth` deep.
  std::vector<ComplexMatrix> level;
  {
    SpanTracker level_span(2 * full, rank_tol);
    for (const auto& s : sys.generators()) {
      if (auto unit = level_span.try_add(s.matrix(), s.matrix().norm())) level.push_back(*unit);
      if (auto unit = global.try_add(s.matrix(), s.matrix().norm())) kept.push_back(std::move(*unit));
    }
  }

  for (int depth = 1; depth <= max_depth && global.rank() < full && !level.empty(); ++depth) {
    SpanTracker level_span(2 * full, rank_tol);
    std::vector<ComplexMatrix> next;
    for (const auto& g : sys.generators()) {
      const double scale = 2.0 * g.matrix().norm();
      for (const auto& x : level) {
        const ComplexMatrix candidate = commutator(g.matrix(), x);
        if (auto unit = level_span.try_add(candidate, scale)) next.push_back(*unit);
        if (auto unit = global.try_add(candidate, scale)) {
          kept.push_back(std::move(*unit));
          report.max_depth_used = depth;
        }
      }
    }
    level = std::move(next);
  }

  report.rank = real_span_rank(kept, rank_tol);
  report.basis.reserve(kept.size());
  for (auto& b : kept) report.basis.push_back(SkewHermitianMatrix::trusted(std::move(b)));
  return report;
}

// ---------------------------------------------------------------------------

TaylorMatrixSeries TaylorMatrixSeries::derivative() const {
  TaylorMatrixSeries d;
  if (coefficients.size() <= 1) {
    if (!coefficients.empty()) {
      d.coefficients.push_back(ComplexMatrix::Zero(coefficients[0].rows(), coefficients[0].cols()));
    }
    return d;
  }
  d.coefficients.reserve(coefficients.size() - 1);
  for (std::size_t p = 0; p + 1 < coefficients.size(); ++p) {
    d.coefficients.push_back(static_cast<double>(p + 1) * coefficients[p + 1]);
  }
  return d;
}

TaylorMatrixSeries taylor_A(const SystemDef& sys, const AmplitudeVector& amps, double period,
                            int order) {
  if (order < 0) throw std::invalid_argument("taylor_A: order must be >= 0");
  if (!(period > 0.0)) throw std::invalid_argument("taylor_A: period must be positive");
  if (amps.controls() != sys.m()) {
    throw std::invalid_argument("taylor_A: amplitude rows must match the number of controls");
  }
  const int n = sys.n();
  const double omega = 2.0 * kPi / period;

  TaylorMatrixSeries series;
  series.coefficients.assign(order + 1, ComplexMatrix::Zero(n, n));
  for (int p = 1; p <= order; p += 2) {
    // d^p/dt^p sin(x t) at 0 is x^p * (+1, -1, +1, ...) for p = 1, 3, 5, ...
    const double sign = (p % 4 == 1) ? 1.0 : -1.0;
    const double inv_factorial = 1.0 / std::tgamma(p + 1.0);
    for (int k = 0; k < sys.m(); ++k) {
      double weight = 0.0;
      for (int l = 0; l < amps.harmonics(); ++l) {
        weight += amps(k, l) * std::pow((l + 1) * omega, p);
      }
      series.coefficients[p] += (sign * weight * inv_factorial) * sys.generator(k).matrix();
    }
  }
  return series;
}

CoronMatrices coron_matrices_at_zero(const SystemDef& sys, const AmplitudeVector& amps,
                                     double period, int depth) {
  if (depth < 0) throw std::invalid_argument("coron_matrices_at_zero: depth must be >= 0");
  const int n = sys.n();
  const TaylorMatrixSeries a = taylor_A(sys, amps, period, depth);

  CoronMatrices out;
  out.m = sys.m();
  out.depth = depth;
  out.entries.reserve(static_cast<std::size_t>(sys.m()) * (depth + 1));

  for (int k = 0; k < sys.m(); ++k) {
    TaylorMatrixSeries c;
    c.coefficients.assign(depth + 1, ComplexMatrix::Zero(n, n));
    c.coefficients[0] = sys.generator(k).matrix();
    out.entries.push_back(sys.generator(k));

    for (int j = 0; j < depth; ++j) {
      // C^{j+1} = dC^j/dt + [C^j, A], truncated at order depth - j - 1.
      TaylorMatrixSeries next = c.derivative();
      const int next_order = depth - j - 1;
      next.coefficients.resize(next_order + 1);
      for (int p = 0; p <= next_order; ++p) {
        for (int q = 0; q <= p; ++q) {
          next.coefficients[p] += commutator(c.coefficients[q], a.coefficients[p - q]);
        }
      }
      c = std::move(next);

      const ComplexMatrix& value = c.coefficients[0];
      const double defect = skew_defect(value);
      if (defect > 1e-9 * std::max(1.0, value.norm())) {
        std::ostringstream os;
        os << "C_" << k << "^" << j + 1 << "(0) lost skew-Hermiticity: " << defect;
        throw IntegratorTolerance(os.str());
      }
      out.entries.push_back(SkewHermitianMatrix::trusted(value));
    }
  }
  return out;
}

int admissibility_rank(const SystemDef& sys, const AmplitudeVector& amps, double period,
                       int depth, double rank_tol) {
  const CoronMatrices c = coron_matrices_at_zero(sys, amps, period, depth);
  std::vector<ComplexMatrix> raw;
  raw.reserve(c.entries.size());
  for (const auto& e : c.entries) raw.push_back(e.matrix());
  return real_span_rank(raw, rank_tol);
}

}  // namespace stabilizer
