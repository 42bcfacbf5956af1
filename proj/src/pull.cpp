#include "pull.hpp"

#include <cmath>

#include "error.hpp"
#include "estimate_space.hpp"

namespace cavitylb {

using detail::EstimateSpace;
using detail::LevelSpace;

void PullParams::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("pull: lambda must lie in (0,1)");
  if (!(delta1 >= 0.0 && delta1 <= 1.0)) throw DomainError("pull: delta1 must lie in [0,1]");
  if (!(delta0 > 0.0) || !std::isfinite(delta0))
    throw DomainError("pull: delta0 must be positive");
}

PullParams PullParams::from_overall(double lambda, double delta, double delta1) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("pull: lambda must lie in (0,1)");
  const double d0 = (delta - lambda * delta1) / (1.0 - lambda);
  if (!(d0 > 0.0)) throw DomainError("pull: delta1 must be below delta/lambda");
  PullParams p{lambda, d0, delta1};
  p.validate();
  return p;
}

namespace {

// Σ_{i<k} (1−δ₁)^i, equal to k at δ₁ = 0.
double geo(int k, double d1) {
  if (d1 == 0.0) return k;
  return -std::expm1(k * std::log1p(-d1)) / d1;
}

double upow(int k, double d1) { return k == 0 ? 1.0 : std::pow(1.0 - d1, k); }

}  // namespace

double pull_m_tilde(const PullParams& params) {
  params.validate();
  const double l = params.lambda;
  const double d1 = params.delta1;
  const double d = params.delta();
  if (d1 == 0.0) return detail::snap_integer(l / d);
  if (d1 == 1.0) return 0.0;
  return detail::snap_integer(std::log1p(-l * d1 / d) / std::log1p(-d1));
}

double pull_lambda_m(int m, double delta0, double delta1) {
  if (m < 0) throw DomainError("pull_lambda_m: m must be nonnegative");
  if (m == 0) return 0.0;
  const double a = delta0 * geo(m, delta1);
  return a / (a + upow(m, delta1));
}

Generator pull_build_generator(const PullParams& params, const PhaseType& ph, int m, double nu) {
  params.validate();
  if (m < 0) throw DomainError("pull: m must be nonnegative");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("pull: nu must be nonnegative");
  const int n = ph.phases();
  const EstimateSpace sp{m, n};
  const double d0 = params.delta0;
  const double d1 = params.delta1;
  const RowVector& alpha = ph.alpha();
  const Matrix& s = ph.S();
  const Vector& exit = ph.exit_rates();

  GeneratorBuilder b = sp.make_builder();
  // the dispatcher learns the queue holds q jobs and tops it up to m
  auto refill = [&](int from, double rate) {
    if (m == 0) {
      b.add_rate(from, sp.empty(0), rate);
      return;
    }
    for (int k = 0; k < n; ++k) b.add_rate(from, sp.busy(m, m, k), rate * alpha(k));
  };

  for (int e : {m, m + 1}) {
    const int idle = sp.empty(e);
    refill(idle, d0);
    if (e == m)
      for (int k = 0; k < n; ++k) b.add_rate(idle, sp.busy(1, m + 1, k), nu * alpha(k));

    for (int q = 1; q <= e; ++q) {
      for (int j = 0; j < n; ++j) {
        const int from = sp.busy(q, e, j);
        for (int k = 0; k < n; ++k)
          if (k != j) b.add_rate(from, sp.busy(q, e, k), s(j, k));
        const double plain = (1.0 - d1) * exit(j);
        if (q == 1)
          b.add_rate(from, sp.empty(e), plain);
        else
          for (int k = 0; k < n; ++k) b.add_rate(from, sp.busy(q - 1, e, k), plain * alpha(k));
        refill(from, d1 * exit(j));
        if (e == m) b.add_rate(from, sp.busy(q + 1, m + 1, j), nu);
      }
    }
  }
  return b.build();
}

Generator pull_build_generator_nu0(const PullParams& params, const PhaseType& ph, int m) {
  params.validate();
  if (m < 1) throw DomainError("pull_build_generator_nu0: m must be positive");
  const int n = ph.phases();
  const LevelSpace sp{m, n, m};
  const double d1 = params.delta1;
  const RowVector& alpha = ph.alpha();
  const Matrix& s = ph.S();
  const Vector& exit = ph.exit_rates();

  GeneratorBuilder b = sp.make_builder();
  for (int k = 0; k < n; ++k) b.add_rate(0, sp.at(m, k), params.delta0 * alpha(k));
  for (int q = 1; q <= m; ++q) {
    for (int j = 0; j < n; ++j) {
      const int from = sp.at(q, j);
      for (int k = 0; k < n; ++k)
        if (k != j) b.add_rate(from, sp.at(q, k), s(j, k));
      const double plain = (1.0 - d1) * exit(j);
      if (q == 1)
        b.add_rate(from, 0, plain);
      else
        for (int k = 0; k < n; ++k) b.add_rate(from, sp.at(q - 1, k), plain * alpha(k));
      for (int k = 0; k < n; ++k) b.add_rate(from, sp.at(m, k), d1 * exit(j) * alpha(k));
    }
  }
  return b.build();
}

std::vector<double> pull_cumulative(const PullParams& params, int m) {
  params.validate();
  if (m < 1) throw DomainError("pull_cumulative: m must be positive");
  const double d0 = params.delta0;
  const double d1 = params.delta1;
  const double denom = d0 * geo(m, d1) + upow(m, d1);
  std::vector<double> out(m + 1);
  for (int i = 1; i <= m + 1; ++i)
    out[i - 1] = (d0 * upow(m - i + 1, d1) * geo(i - 1, d1) + upow(m, d1)) / denom;
  return out;
}

double pull_mean_queue_at(int m, double delta0, double delta1) {
  if (m < 0) throw DomainError("pull_mean_queue_at: m must be nonnegative");
  double sum = 0.0;
  for (int i = 1; i <= m; ++i) sum += geo(i, delta1);
  return delta0 * sum / (delta0 * geo(m, delta1) + upow(m, delta1));
}

MeanQueueBounds pull_mean_queue_bounds(const PullParams& params) {
  const double mt = pull_m_tilde(params);
  return {pull_mean_queue_at(static_cast<int>(std::floor(mt)), params.delta0, params.delta1),
          pull_mean_queue_at(static_cast<int>(std::ceil(mt)), params.delta0, params.delta1)};
}

PullSolution pull_solve(const PullParams& params, const PhaseType& ph) {
  params.validate();
  ph.require_unit_mean();
  PullSolution sol;
  sol.params = params;
  sol.m_tilde = pull_m_tilde(params);
  sol.m = static_cast<int>(std::floor(sol.m_tilde));
  sol.max_queue = std::max(static_cast<int>(std::ceil(sol.m_tilde)), 1);
  const double target = 1.0 - params.lambda;

  if (!detail::is_integer(sol.m_tilde)) {
    auto f = [&](double nu) {
      const StationaryDist d = stationary(pull_build_generator(params, ph, sol.m, nu));
      double p0 = 0.0;
      for (std::size_t i = 0; i < d.labels.size(); ++i)
        if (d.labels[i].level == 0) p0 += d.pi(static_cast<Eigen::Index>(i));
      return p0;
    };
    const double hi = find_upper_bracket(f, target);
    sol.nu = bisect_monotone(f, target, 0.0, hi, 1e-13);
  }
  sol.dist = stationary(pull_build_generator(params, ph, sol.m, sol.nu));
  const int m = sol.m;
  sol.q_marginal = marginal(sol.dist, [](const StateLabel& l) { return l.level; }, m + 2);
  const auto e = marginal(sol.dist, [m](const StateLabel& l) { return l.estimate - m; }, 2);
  sol.e_marginal = {e[0], e[1]};
  double eq = 0.0;
  for (int q = 0; q < m + 2; ++q) eq += q * sol.q_marginal[q];
  sol.mean_queue = eq;
  sol.mean_response = eq / params.lambda;
  sol.bounds = pull_mean_queue_bounds(params);
  return sol;
}

double pull_rate_residual(const PullSolution& sol, const PhaseType& ph) {
  const PullParams& p = sol.params;
  const int m = sol.m;
  double updates = 0.0;
  for (std::size_t i = 0; i < sol.dist.labels.size(); ++i) {
    const StateLabel& l = sol.dist.labels[i];
    if (l.level >= 1 && l.level <= m)
      updates += (m - l.level + 1) * sol.dist.pi(static_cast<Eigen::Index>(i)) *
                 ph.exit_rates()(l.phase);
  }
  const double rhs = p.lambda - p.delta0 * m * sol.q_marginal[0] - p.delta1 * updates;
  return std::abs(sol.nu * sol.e_marginal[0] - rhs);
}

double pull_heavy_traffic_slope(double delta1) {
  if (!(delta1 >= 0.0 && delta1 <= 1.0)) throw DomainError("pull: delta1 must lie in [0,1]");
  if (delta1 == 0.0 || delta1 == 1.0) return 0.0;
  return -1.0 / std::log1p(-delta1);
}

}  // namespace cavitylb
