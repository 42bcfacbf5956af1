#pragma once

#include <array>
#include <vector>

#include "ctmc.hpp"
#include "phase_type.hpp"
#include "push.hpp"

namespace cavitylb {

struct PullParams {
  double lambda = 0.0;  // (0,1)
  double delta0 = 0.0;  // update rate of an idle server, > 0
  double delta1 = 0.0;  // update probability at a service completion, [0,1]

  // Overall update rate λδ₁ + (1−λ)δ₀.
  double delta() const { return lambda * delta1 + (1.0 - lambda) * delta0; }
  void validate() const;

  // δ₀ = (δ − λδ₁)/(1 − λ); throws DomainError when that is not positive.
  static PullParams from_overall(double lambda, double delta, double delta1);
};

struct PullSolution {
  PullParams params;
  double m_tilde = 0.0;
  int m = 0;
  int max_queue = 0;
  double nu = 0.0;
  StationaryDist dist;
  std::vector<double> q_marginal;
  std::array<double, 2> e_marginal{};
  double mean_queue = 0.0;
  double mean_response = 0.0;
  MeanQueueBounds bounds{0.0, 0.0};
};

// log(1 − λδ₁/δ)/log(1 − δ₁), with the limits λ/δ at δ₁ = 0 and 0 at δ₁ = 1.
double pull_m_tilde(const PullParams& params);
double pull_lambda_m(int m, double delta0, double delta1);

Generator pull_build_generator(const PullParams& params, const PhaseType& ph, int m, double nu);
Generator pull_build_generator_nu0(const PullParams& params, const PhaseType& ph, int m);

// P[Q < i] for the ν = 0 chain, i = 1..m+1; does not depend on the job sizes.
std::vector<double> pull_cumulative(const PullParams& params, int m);

PullSolution pull_solve(const PullParams& params, const PhaseType& ph);

// |ν π^e_m − (λ − δ₀ m π_0 − δ₁ Σ (m−q+1) π_(q,e,j) s*_j)|
double pull_rate_residual(const PullSolution& sol, const PhaseType& ph);

// Mean queue length of the ν = 0 chain at level m.
double pull_mean_queue_at(int m, double delta0, double delta1);
MeanQueueBounds pull_mean_queue_bounds(const PullParams& params);

// 1/log(1/(1−δ₁)); 0 for δ₁ = 0 (m̃ stays bounded by λ/δ, no log scaling).
double pull_heavy_traffic_slope(double delta1);

}  // namespace cavitylb
