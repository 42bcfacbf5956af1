#pragma once

#include <array>
#include <vector>

#include "ctmc.hpp"
#include "phase_type.hpp"

namespace cavitylb {

struct PushParams {
  double lambda = 0.0;  // arrival rate per server, [0,1)
  double delta = 0.0;   // probe rate per server, > 0

  void validate() const;
};

struct MeanQueueBounds {
  double lower;
  double upper;
};

struct MaxQueueBounds {
  int lower;
  int upper;
};

struct PushSolution {
  PushParams params;
  double y = 0.0;
  double m_tilde = 0.0;
  int m = 0;
  int max_queue = 0;  // max(⌈m̃⌉, 1) for λ > 0
  double nu = 0.0;
  StationaryDist dist;
  std::vector<double> q_marginal;      // π_0 .. π_{m+1}
  std::array<double, 2> e_marginal{};  // (π^e_m, π^e_{m+1})
  double mean_queue = 0.0;
  double mean_response = 0.0;
  MeanQueueBounds bounds{0.0, 0.0};
};

// Real-valued level m̃ whose ceiling is the maximum queue length; depends on
// the job sizes only through y = P[Z < X].
double push_m_tilde(const PushParams& params, double y);
// Arrival rate at which the maximum queue length moves from m to m+1.
double push_lambda_m(int m, double delta, double y);
// Probe rate at which the maximum queue length moves from m+1 to m.
double push_delta_m(int m, double lambda, double y);

Generator push_build_generator(const PushParams& params, const PhaseType& ph, int m, double nu);
// Reduced chain for ν = 0 on {0} ∪ {(q,j): q = 1..m}.
Generator push_build_generator_nu0(const PushParams& params, const PhaseType& ph, int m);

// Closed-form P[Q < i] for the ν = 0 chain, i = 1..m.
std::vector<double> push_cumulative(const PushParams& params, const PhaseType& ph, int m);

PushSolution push_solve(const PushParams& params, const PhaseType& ph);

// |ν π^e_m − (λ − δ Σ_{q≤m} (m−q) π_q)| at a solution.
double push_rate_residual(const PushSolution& sol);

// Distribution-free sandwich on ⌈m̃⌉ (deterministic below, Z(ε→0) above).
MaxQueueBounds push_max_queue_bounds(const PushParams& params);
// m̃ for deterministic job sizes (y = e^{−δ}).
double push_m_deterministic(const PushParams& params);
// m̃ for Erlang(k) job sizes; lower bound over all order-k PH.
double push_m_erlang_bound(int k, const PushParams& params);

MeanQueueBounds push_mean_queue_bounds(const PushParams& params, const PhaseType& ph);
MeanQueueBounds push_mean_queue_bounds_from_y(const PushParams& params, double y);
// Distribution-free upper bound δ·u²/(1 + δ·u), u = ⌈λ/((1−λ)δ)⌉.
double push_mean_queue_upper_free(const PushParams& params);

// lim m̃ / log(1/(1−λ)) as λ → 1; +∞ for y ≥ 1.
double push_heavy_traffic_slope(double y);

}  // namespace cavitylb
