#pragma once

#include <vector>

#include "ctmc.hpp"
#include "phase_type.hpp"
#include "push.hpp"

namespace cavitylb {

struct WaterfillParams {
  double lambda = 0.0;  // (0,1)
  double delta = 0.0;   // overall probe rate, > 0

  void validate() const;
};

struct WaterfillSolution {
  WaterfillParams params;
  double y = 0.0;
  double m_tilde = 0.0;
  int m = 0;
  int max_queue = 0;
  double c = 0.0;          // numeric root of π₀(m,c) = 1−λ
  double c_formula = 0.0;  // root of the renewal-cycle formula, a cross-check
  StationaryDist dist;
  std::vector<double> q_marginal;  // π_0 .. π_{m+1}
  double mean_queue = 0.0;
  double mean_response = 0.0;
  MeanQueueBounds bounds{0.0, 0.0};
};

// Chain on {0} ∪ {(q,j): q = 1..m+1}; m = 0 is allowed (single-slot loss queue).
Generator wf_build_generator(const WaterfillParams& params, const PhaseType& ph, int m, double c);

// c from the renewal-cycle identity
//   1−λ = (y^{m−1}/δ) / (1/δ + κ(−K)⁻¹1)
// by bisection on [0,1]; requires m ≥ 1. Throws SolverError when there is no
// root (m is not ⌊m̃⌋).
double wf_find_c(const WaterfillParams& params, const PhaseType& ph, int m);
// c by bisection of π₀(m,c) = 1−λ on the generator.
double wf_find_c_numeric(const WaterfillParams& params, const PhaseType& ph, int m);

WaterfillSolution wf_solve(const WaterfillParams& params, const PhaseType& ph);

// Queue-length marginal π_0..π_{m+1} from the closed forms; π_{m+1} = 0 when c = 0.
std::vector<double> wf_closed_form_dist(const WaterfillParams& params, const PhaseType& ph, int m,
                                        double c);

}  // namespace cavitylb
