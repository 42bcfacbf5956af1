#include "phase_type.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace cavitylb {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace

PhaseType::PhaseType(RowVector alpha, Matrix s, std::string label)
    : alpha_(std::move(alpha)), s_(std::move(s)), label_(std::move(label)) {
  const Eigen::Index n = alpha_.size();
  if (n == 0) throw DomainError("phase-type: alpha must be non-empty");
  if (s_.rows() != n || s_.cols() != n)
    throw DomainError("phase-type: S must be square with the size of alpha");
  if (!alpha_.allFinite() || !s_.allFinite()) throw DomainError("phase-type: non-finite entry");
  if ((alpha_.array() < 0.0).any()) throw DomainError("phase-type: alpha has a negative entry");
  if (std::abs(alpha_.sum() - 1.0) > 1e-12)
    throw DomainError("phase-type: alpha must sum to 1 (sum = " + fmt(alpha_.sum()) + ")");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(s_(i, i) < 0.0)) throw DomainError("phase-type: diagonal of S must be negative");
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && s_(i, j) < 0.0) throw DomainError("phase-type: off-diagonal of S must be >= 0");
  }
  exit_ = -(s_ * Vector::Ones(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    // Row sums of S are ≤ 0; clip rounding noise on exactly-zero exits.
    if (exit_(i) < -1e-12 * std::abs(s_(i, i)))
      throw DomainError("phase-type: row sums of S must be <= 0");
    if (exit_(i) < 0.0) exit_(i) = 0.0;
  }

  Vector t;
  try {
    t = solve_right(-s_, Vector::Ones(n));  // expected time to absorption per phase
  } catch (const SolverError&) {
    throw DomainError("phase-type: S is singular (some phase is not transient)");
  }
  if ((t.array() < 0.0).any()) throw DomainError("phase-type: S is not a sub-generator");
  mean_ = alpha_.dot(t);
  const double second = 2.0 * alpha_.dot(solve_right(-s_, t));
  scv_ = second / (mean_ * mean_) - 1.0;
}

void PhaseType::require_unit_mean() const {
  if (std::abs(mean_ - 1.0) > 1e-6)
    throw DomainError("job-size distribution must have unit mean (mean = " + fmt(mean_) + ")");
}

Moments moments(const PhaseType& ph) { return {ph.mean(), ph.scv()}; }

TimerStats timer_stats(const PhaseType& ph, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("timer rate delta must be > 0");
  const int n = ph.phases();
  const Matrix resolvent = delta * Matrix::Identity(n, n) - ph.S();
  const RowVector v = solve_left(resolvent, ph.alpha());  // α(δI − S)⁻¹
  TimerStats out;
  out.delta = delta;
  out.y = v.dot(ph.exit_rates());
  const double tail = v.sum();  // α(δI − S)⁻¹1 = P[Z > X]/δ
  out.y_from_survival = 1.0 - delta * tail;
  if (tail > 0.0) {
    out.alpha_prime = v / tail;
  } else {
    out.alpha_prime = ph.alpha();
  }
  out.excess = out.alpha_prime.dot(solve_right(-ph.S(), Vector::Ones(n)));
  return out;
}

PhaseType make_exponential() {
  return PhaseType(RowVector::Ones(1), -Matrix::Ones(1, 1), "Exponential");
}

PhaseType make_erlang(int k) {
  if (k < 1) throw DomainError("erlang: k must be >= 1");
  RowVector alpha = RowVector::Zero(k);
  alpha(0) = 1.0;
  Matrix s = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    s(i, i) = -k;
    if (i + 1 < k) s(i, i + 1) = k;
  }
  return PhaseType(std::move(alpha), std::move(s), "Erlang(" + std::to_string(k) + ")");
}

PhaseType make_hyperexp(double scv, double f) {
  if (!(scv >= 1.0) || !std::isfinite(scv)) throw DomainError("hyperexp: scv must be >= 1");
  if (!(f > 0.0 && f < 1.0)) throw DomainError("hyperexp: f must lie in (0,1)");
  // Unit mean and E[Z²] = scv + 1 with p₁/μ₁ = f, p₂/μ₂ = 1−f reduce to a
  // quadratic in μ₁; the larger root is the conventional branch.
  const double disc = (scv - 1.0) * (scv - 1.0 + 8.0 * f * (1.0 - f));
  const double mu1 = (scv - 1.0 + 4.0 * f + std::sqrt(disc)) / (2.0 * f * (scv + 1.0));
  const double p1 = f * mu1;
  const double p2 = 1.0 - p1;
  if (!(p1 > 0.0 && p2 > 0.0)) throw DomainError("hyperexp: no positive-rate solution");
  const double mu2 = p2 / (1.0 - f);
  if (!(mu2 > 0.0) || !std::isfinite(mu2)) throw DomainError("hyperexp: no positive-rate solution");
  RowVector alpha(2);
  alpha << p1, p2;
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = -mu1;
  s(1, 1) = -mu2;
  return PhaseType(std::move(alpha), std::move(s),
                   "Hyperexponential(2) f=" + fmt(f) + " SCV=" + fmt(scv));
}

PhaseType make_hyper_erlang(int k, int l, double p) {
  if (k < 1 || l < 1) throw DomainError("hyper-erlang: k and l must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("hyper-erlang: p must lie in [0,1]");
  const int n = k + l;
  RowVector alpha = RowVector::Zero(n);
  alpha(0) = p;
  alpha(k) += 1.0 - p;
  Matrix s = Matrix::Zero(n, n);
  for (int i = 0; i < k; ++i) {
    s(i, i) = -k;
    if (i + 1 < k) s(i, i + 1) = k;
  }
  for (int i = 0; i < l; ++i) {
    s(k + i, k + i) = -l;
    if (i + 1 < l) s(k + i, k + i + 1) = l;
  }
  return PhaseType(std::move(alpha), std::move(s),
                   "Hyper-Erlang(" + std::to_string(k) + "," + std::to_string(l) + ") p=" + fmt(p));
}

PhaseType make_z_epsilon(double eps) {
  if (!(eps > 0.0 && eps <= 0.5)) throw DomainError("z-epsilon: eps must lie in (0, 1/2]");
  RowVector alpha(2);
  alpha << 1.0 - eps, eps;
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = -(1.0 - eps) / eps;
  s(1, 1) = -eps / (1.0 - eps);
  return PhaseType(std::move(alpha), std::move(s), "Z(" + fmt(eps) + ")");
}

}  // namespace cavitylb
