#pragma once

#include <string>

#include "linalg.hpp"

namespace cavitylb {

// Phase-type distribution (α, S): absorption time of a CTMC with initial
// phase law α and sub-generator S. Immutable once constructed.
class PhaseType {
 public:
  // Throws DomainError unless α is a probability vector, S has nonnegative
  // off-diagonal entries, negative diagonal, nonpositive row sums and is
  // invertible.
  PhaseType(RowVector alpha, Matrix s, std::string label = "ph");

  const RowVector& alpha() const { return alpha_; }
  const Matrix& S() const { return s_; }
  // s* = −S·1, absorption rate out of each phase.
  const Vector& exit_rates() const { return exit_; }
  int phases() const { return static_cast<int>(alpha_.size()); }
  const std::string& label() const { return label_; }

  double mean() const { return mean_; }
  double scv() const { return scv_; }

  // Policy solvers assume E[Z] = 1; throws DomainError if |mean − 1| > 1e−6.
  void require_unit_mean() const;

 private:
  RowVector alpha_;
  Matrix s_;
  Vector exit_;
  std::string label_;
  double mean_ = 0.0;
  double scv_ = 0.0;
};

struct Moments {
  double mean;
  double scv;
};

Moments moments(const PhaseType& ph);

// Race between a job of size Z ~ ph and an exponential timer X of rate delta.
struct TimerStats {
  double delta = 0.0;
  double y = 0.0;               // P[Z < X] = α(δI − S)⁻¹ s*
  double y_from_survival = 0.0; // 1 − δ·α(δI − S)⁻¹1, same quantity
  RowVector alpha_prime;        // phase law at the moment X expires first
  double excess = 0.0;          // E[Z − X | Z > X] = α'(−S)⁻¹1
};

TimerStats timer_stats(const PhaseType& ph, double delta);

PhaseType make_exponential();
PhaseType make_erlang(int k);
// Order-2 hyperexponential with unit mean, given SCV and the fraction f of
// the mean contributed by phase 1 (p₁/μ₁ = f).
PhaseType make_hyperexp(double scv, double f);
// Mixture of Erlang(k) and Erlang(l), both with unit mean, weights p / 1−p.
PhaseType make_hyper_erlang(int k, int l, double p);
// Two-phase family with p₁ = 1−ε, μ₁ = (1−ε)/ε, p₂ = ε, μ₂ = ε/(1−ε).
PhaseType make_z_epsilon(double eps);

}  // namespace cavitylb
