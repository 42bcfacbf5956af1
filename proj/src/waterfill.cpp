#include "waterfill.hpp"

#include <cmath>

#include "error.hpp"
#include "estimate_space.hpp"

namespace cavitylb {

using detail::LevelSpace;

void WaterfillParams::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("waterfill: lambda must lie in (0,1)");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw DomainError("waterfill: delta must be positive");
}

Generator wf_build_generator(const WaterfillParams& params, const PhaseType& ph, int m, double c) {
  params.validate();
  if (m < 0) throw DomainError("waterfill: m must be nonnegative");
  if (!(c >= 0.0 && c <= 1.0)) throw DomainError("waterfill: c must lie in [0,1]");
  const int n = ph.phases();
  const LevelSpace sp{m + 1, n, -1};
  const double d = params.delta;
  const RowVector& alpha = ph.alpha();
  const Matrix& s = ph.S();
  const Vector& exit = ph.exit_rates();

  GeneratorBuilder b = sp.make_builder();
  // from the empty state
  for (int j = 0; j < n; ++j) {
    if (m >= 1) b.add_rate(0, sp.at(m, j), d * (1.0 - c) * alpha(j));
    b.add_rate(0, sp.at(m + 1, j), d * c * alpha(j));
  }
  for (int q = 1; q <= m + 1; ++q) {
    for (int j = 0; j < n; ++j) {
      const int from = sp.at(q, j);
      for (int k = 0; k < n; ++k)
        if (k != j) b.add_rate(from, sp.at(q, k), s(j, k));
      if (q == 1)
        b.add_rate(from, 0, exit(j));
      else
        for (int k = 0; k < n; ++k) b.add_rate(from, sp.at(q - 1, k), exit(j) * alpha(k));
      if (q < m) b.add_rate(from, sp.at(m, j), d * (1.0 - c));
      if (q <= m) b.add_rate(from, sp.at(m + 1, j), d * c);
    }
  }
  return b.build();
}

namespace {

double empty_mass(const StationaryDist& d) {
  double p0 = 0.0;
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    if (d.labels[i].level == 0) p0 += d.pi(static_cast<Eigen::Index>(i));
  return p0;
}

// (y^{m−1}/δ) / (1/δ + κ(−K)⁻¹1)
double renewal_empty_mass(const PhaseType& ph, const TimerStats& ts, int m, double c) {
  const int n = ph.phases();
  const double d = ts.delta;
  const double ym1 = std::pow(ts.y, m - 1);
  const RowVector entry = ym1 * ph.alpha() + (1.0 - ym1) * ts.alpha_prime;
  RowVector kappa(2 * n);
  kappa << (1.0 - c) * entry, c * entry;
  Matrix k = Matrix::Zero(2 * n, 2 * n);
  k.topLeftCorner(n, n) = ph.S() - d * c * Matrix::Identity(n, n);
  k.topRightCorner(n, n) = d * c * Matrix::Identity(n, n);
  k.bottomLeftCorner(n, n) = ph.exit_rates() * ph.alpha();
  k.bottomRightCorner(n, n) = ph.S();
  const double sojourn = kappa.dot(solve_right(-k, Vector::Ones(2 * n)));
  return (ym1 / d) / (1.0 / d + sojourn);
}

}  // namespace

double wf_find_c(const WaterfillParams& params, const PhaseType& ph, int m) {
  params.validate();
  if (m < 1) throw DomainError("wf_find_c: m must be positive");
  const TimerStats ts = timer_stats(ph, params.delta);
  auto f = [&](double c) { return renewal_empty_mass(ph, ts, m, c); };
  return bisect_monotone(f, 1.0 - params.lambda, 0.0, 1.0, 1e-13);
}

double wf_find_c_numeric(const WaterfillParams& params, const PhaseType& ph, int m) {
  params.validate();
  auto f = [&](double c) { return empty_mass(stationary(wf_build_generator(params, ph, m, c))); };
  return bisect_monotone(f, 1.0 - params.lambda, 0.0, 1.0, 1e-13);
}

std::vector<double> wf_closed_form_dist(const WaterfillParams& params, const PhaseType& ph, int m,
                                        double c) {
  params.validate();
  if (m < 0) throw DomainError("wf_closed_form_dist: m must be nonnegative");
  const double lambda = params.lambda;
  std::vector<double> pi(m + 2, 0.0);
  pi[0] = 1.0 - lambda;
  if (m == 0) {
    pi[1] = lambda;
    return pi;
  }
  const double y = timer_stats(ph, params.delta).y;
  for (int q = 1; q < m; ++q) pi[q] = (1.0 - lambda) * (1.0 / y - 1.0) / std::pow(y, q - 1);
  if (c > 0.0) {
    double assigned = 0.0;
    for (int q = 0; q < m; ++q) assigned += (m - q) * pi[q];
    pi[m + 1] = 1.0 - (lambda / params.delta - assigned) / c;
  }
  pi[m] = 1.0 - (1.0 - lambda) * std::pow(y, 1 - m) - pi[m + 1];
  return pi;
}

WaterfillSolution wf_solve(const WaterfillParams& params, const PhaseType& ph) {
  params.validate();
  ph.require_unit_mean();
  WaterfillSolution sol;
  sol.params = params;
  const PushParams pp{params.lambda, params.delta};
  sol.y = timer_stats(ph, params.delta).y;
  sol.m_tilde = push_m_tilde(pp, sol.y);
  sol.m = static_cast<int>(std::floor(sol.m_tilde));
  sol.max_queue = std::max(static_cast<int>(std::ceil(sol.m_tilde)), 1);

  if (detail::is_integer(sol.m_tilde)) {
    sol.c = sol.c_formula = 0.0;
  } else {
    sol.c = wf_find_c_numeric(params, ph, sol.m);
    sol.c_formula = sol.m >= 1 ? wf_find_c(params, ph, sol.m)
                               : params.lambda / (params.delta * (1.0 - params.lambda));
  }
  sol.dist = stationary(wf_build_generator(params, ph, sol.m, sol.c));
  sol.q_marginal = marginal(sol.dist, [](const StateLabel& l) { return l.level; }, sol.m + 2);
  double eq = 0.0;
  for (int q = 0; q < sol.m + 2; ++q) eq += q * sol.q_marginal[q];
  sol.mean_queue = eq;
  sol.mean_response = eq / params.lambda;
  sol.bounds = push_mean_queue_bounds_from_y(pp, sol.y);
  return sol;
}

}  // namespace cavitylb
