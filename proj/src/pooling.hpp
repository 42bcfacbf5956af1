#pragma once

#include <array>
#include <string>
#include <vector>

#include "ctmc.hpp"
#include "phase_type.hpp"

namespace cavitylb {

struct PoolingParams {
  double lambda = 0.0;  // (0,1)
  double p = 0.0;       // capacity share of the central server, [0,1)

  void validate() const;
};

enum class PoolingRegime { CentralOnly, SingleSlot, General };

std::string to_string(PoolingRegime r);

struct PoolingSolution {
  PoolingParams params;
  PoolingRegime regime = PoolingRegime::General;
  int m = 0;          // the cavity queue never exceeds m+1 jobs
  int max_queue = 0;  // m+1, or 0 in the central-only regime
  double omega = 0.0;
  StationaryDist dist;
  std::vector<double> q_marginal;  // π_0 .. π_{m+1}
  double mean_queue = 0.0;
  double mean_response = 0.0;
};

// Threshold (1+λ−√(1+2λ−3λ²))/2 on p above which the queue never holds more
// than one job.
double pooling_single_slot_threshold(double lambda);
PoolingRegime pooling_regime(const PoolingParams& params);

// R = λ(λI − (1−p)S − λ1α)⁻¹
Matrix pooling_R(const PoolingParams& params, const PhaseType& ph);

// Idle probability of the M/PH/1/m queue with service slowed to 1−p
// (the ω = ∞ chain); 1 for m = 0.
double pooling_idle_prob_truncated(const PoolingParams& params, const PhaseType& ph, int m);

// Largest m with π₀(m,∞) > (1−λ)/(1−p); requires λ > p > 0.
int pooling_find_m(const PoolingParams& params, const PhaseType& ph);

// Levels 0..m+1; arrivals at rate λ below m+1, service at rate 1−p, and an
// extra decrement ω from level m+1.
Generator pooling_build_generator(const PoolingParams& params, const PhaseType& ph, int m,
                                  double omega);

PoolingSolution pooling_solve(const PoolingParams& params, const PhaseType& ph);

// |ω π_{m+1} − (p − λ π_{m+1})|
double pooling_token_residual(const PoolingSolution& sol);

// Closed-form level probabilities π_1..π_{m−1} = (1−λ)/(1−p)·αR^q·1.
std::vector<double> pooling_lower_levels(const PoolingParams& params, const PhaseType& ph, int m);
// (π_m·1, π_{m+1}·1) from the two-level linear system given ω.
std::array<double, 2> pooling_top_levels(const PoolingParams& params, const PhaseType& ph, int m,
                                         double omega);

// Idle probability of the M/D/1/n queue with arrival rate ρ = λ/(1−p), from
// the alternating closed-form sum, evaluated in extended precision.
double pooling_md1_idle_prob(double rho, int n);
// m for deterministic job sizes (smallest n with idle probability below the
// target, minus one); a lower bound on pooling_find_m over all job sizes.
int pooling_deterministic_min_m(const PoolingParams& params);

}  // namespace cavitylb
