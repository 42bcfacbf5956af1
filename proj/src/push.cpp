#include "push.hpp"

#include <cmath>
#include <limits>

#include "error.hpp"
#include "estimate_space.hpp"

namespace cavitylb {

using detail::EstimateSpace;
using detail::LevelSpace;

void PushParams::validate() const {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("push: lambda must lie in [0,1)");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("push: delta must be positive");
}

namespace {

void check_y(double y) {
  if (!(y > 0.0 && y < 1.0)) throw DomainError("push: y must lie in (0,1)");
}

double m_tilde_from(double lambda, double delta, double y) {
  if (lambda == 0.0) return 0.0;
  const double a = lambda / (delta * (1.0 - lambda));
  const double mt = 1.0 - std::log1p((a - 1.0) * (1.0 - y)) / std::log(y);
  return detail::snap_integer(std::max(0.0, mt));
}

}  // namespace

double push_m_tilde(const PushParams& params, double y) {
  params.validate();
  check_y(y);
  return m_tilde_from(params.lambda, params.delta, y);
}

double push_lambda_m(int m, double delta, double y) {
  if (m < 0) throw DomainError("push_lambda_m: m must be nonnegative");
  check_y(y);
  if (m == 0) return 0.0;
  const double ym = std::pow(y, m);
  const double num = delta * y * (1.0 - ym);
  return num / (num + ym * (1.0 - y));
}

double push_delta_m(int m, double lambda, double y) {
  if (m < 1) throw DomainError("push_delta_m: m must be positive");
  check_y(y);
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("push_delta_m: lambda must lie in (0,1)");
  return std::pow(y, m - 1) * (1.0 - y) / (1.0 - std::pow(y, m)) * lambda / (1.0 - lambda);
}

Generator push_build_generator(const PushParams& params, const PhaseType& ph, int m, double nu) {
  params.validate();
  if (m < 0) throw DomainError("push: m must be nonnegative");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("push: nu must be nonnegative");
  const int n = ph.phases();
  const EstimateSpace sp{m, n};
  const double delta = params.delta;
  const RowVector& alpha = ph.alpha();
  const Matrix& s = ph.S();
  const Vector& exit = ph.exit_rates();

  GeneratorBuilder b = sp.make_builder();
  auto to_start = [&](int from, int q, int e, double rate) {
    for (int j = 0; j < n; ++j) b.add_rate(from, sp.busy(q, e, j), rate * alpha(j));
  };

  for (int e : {m, m + 1}) {
    const int idle = sp.empty(e);
    if (m >= 1)
      to_start(idle, m, m, delta);
    else
      b.add_rate(idle, sp.empty(0), delta);
    if (e == m) to_start(idle, 1, m + 1, nu);

    for (int q = 1; q <= e; ++q) {
      for (int j = 0; j < n; ++j) {
        const int from = sp.busy(q, e, j);
        for (int k = 0; k < n; ++k)
          if (k != j) b.add_rate(from, sp.busy(q, e, k), s(j, k));
        if (q == 1)
          b.add_rate(from, sp.empty(e), exit(j));
        else
          to_start(from, q - 1, e, exit(j));
        const int level = std::max(q, m);
        b.add_rate(from, sp.busy(level, level, j), delta);
        if (e == m) b.add_rate(from, sp.busy(q + 1, m + 1, j), nu);
      }
    }
  }
  return b.build();
}

Generator push_build_generator_nu0(const PushParams& params, const PhaseType& ph, int m) {
  params.validate();
  if (m < 1) throw DomainError("push_build_generator_nu0: m must be positive");
  const int n = ph.phases();
  const LevelSpace sp{m, n, m};
  const RowVector& alpha = ph.alpha();
  const Matrix& s = ph.S();
  const Vector& exit = ph.exit_rates();

  GeneratorBuilder b = sp.make_builder();
  for (int j = 0; j < n; ++j) b.add_rate(0, sp.at(m, j), params.delta * alpha(j));
  for (int q = 1; q <= m; ++q) {
    for (int j = 0; j < n; ++j) {
      const int from = sp.at(q, j);
      for (int k = 0; k < n; ++k)
        if (k != j) b.add_rate(from, sp.at(q, k), s(j, k));
      if (q == 1)
        b.add_rate(from, 0, exit(j));
      else
        for (int k = 0; k < n; ++k) b.add_rate(from, sp.at(q - 1, k), exit(j) * alpha(k));
      b.add_rate(from, sp.at(m, j), params.delta);
    }
  }
  return b.build();
}

std::vector<double> push_cumulative(const PushParams& params, const PhaseType& ph, int m) {
  params.validate();
  if (m < 1) throw DomainError("push_cumulative: m must be positive");
  const TimerStats ts = timer_stats(ph, params.delta);
  const double y = ts.y;
  const double ym1 = std::pow(y, m - 1);
  const double denom = 1.0 / params.delta + ym1 + (1.0 - ym1) * ts.excess;
  std::vector<double> out(m);
  for (int i = 1; i <= m; ++i) out[i - 1] = (std::pow(y, m - i) / params.delta) / denom;
  return out;
}

namespace {

void fill_metrics(PushSolution& sol) {
  const int m = sol.m;
  sol.q_marginal = marginal(sol.dist, [](const StateLabel& l) { return l.level; }, m + 2);
  const auto e = marginal(
      sol.dist, [m](const StateLabel& l) { return l.estimate - m; }, 2);
  sol.e_marginal = {e[0], e[1]};
  double eq = 0.0;
  for (int q = 0; q < m + 2; ++q) eq += q * sol.q_marginal[q];
  sol.mean_queue = eq;
  sol.mean_response = sol.params.lambda > 0.0 ? eq / sol.params.lambda : 0.0;
}

}  // namespace

PushSolution push_solve(const PushParams& params, const PhaseType& ph) {
  params.validate();
  ph.require_unit_mean();
  PushSolution sol;
  sol.params = params;
  const TimerStats ts = timer_stats(ph, params.delta);
  sol.y = ts.y;

  if (params.lambda == 0.0) {
    sol.dist = stationary(push_build_generator(params, ph, 0, 0.0));
    fill_metrics(sol);
    return sol;
  }

  sol.m_tilde = m_tilde_from(params.lambda, params.delta, ts.y);
  sol.m = static_cast<int>(std::floor(sol.m_tilde));
  sol.max_queue = std::max(static_cast<int>(std::ceil(sol.m_tilde)), 1);
  const double target = 1.0 - params.lambda;

  if (detail::is_integer(sol.m_tilde)) {
    sol.nu = 0.0;
  } else {
    auto f = [&](double nu) {
      const StationaryDist d = stationary(push_build_generator(params, ph, sol.m, nu));
      double p0 = 0.0;
      for (std::size_t i = 0; i < d.labels.size(); ++i)
        if (d.labels[i].level == 0) p0 += d.pi(static_cast<Eigen::Index>(i));
      return p0;
    };
    const double hi = find_upper_bracket(f, target);
    sol.nu = bisect_monotone(f, target, 0.0, hi, 1e-13);
  }
  sol.dist = stationary(push_build_generator(params, ph, sol.m, sol.nu));
  fill_metrics(sol);
  sol.bounds = push_mean_queue_bounds_from_y(params, ts.y);
  return sol;
}

double push_rate_residual(const PushSolution& sol) {
  const double lambda = sol.params.lambda;
  const double delta = sol.params.delta;
  double probe = 0.0;
  for (int q = 0; q <= sol.m; ++q) probe += (sol.m - q) * sol.q_marginal[q];
  return std::abs(sol.nu * sol.e_marginal[0] - (lambda - delta * probe));
}

double push_m_deterministic(const PushParams& params) {
  params.validate();
  if (params.lambda == 0.0) return 0.0;
  const double d = params.delta;
  const double a = params.lambda / (1.0 - params.lambda);
  return detail::snap_integer(std::log1p(a / d * std::expm1(d)) / d);
}

MaxQueueBounds push_max_queue_bounds(const PushParams& params) {
  params.validate();
  const double up = detail::snap_integer(params.lambda / ((1.0 - params.lambda) * params.delta));
  return {static_cast<int>(std::ceil(push_m_deterministic(params))),
          static_cast<int>(std::ceil(up))};
}

double push_m_erlang_bound(int k, const PushParams& params) {
  params.validate();
  if (k < 1) throw DomainError("push_m_erlang_bound: k must be positive");
  // y = (k/(k+δ))^k for Erlang(k) with unit mean.
  const double y = std::exp(-k * std::log1p(params.delta / k));
  return m_tilde_from(params.lambda, params.delta, y);
}

MeanQueueBounds push_mean_queue_bounds_from_y(const PushParams& params, double y) {
  params.validate();
  check_y(y);
  const double mt = m_tilde_from(params.lambda, params.delta, y);
  const int lo = static_cast<int>(std::floor(mt));
  const int hi = static_cast<int>(std::ceil(mt));
  return {lo - push_lambda_m(lo, params.delta, y) / params.delta,
          hi - push_lambda_m(hi, params.delta, y) / params.delta};
}

MeanQueueBounds push_mean_queue_bounds(const PushParams& params, const PhaseType& ph) {
  return push_mean_queue_bounds_from_y(params, timer_stats(ph, params.delta).y);
}

double push_mean_queue_upper_free(const PushParams& params) {
  params.validate();
  const double u = push_max_queue_bounds(params).upper;
  return params.delta * u * u / (1.0 + params.delta * u);
}

double push_heavy_traffic_slope(double y) {
  if (!(y > 0.0)) throw DomainError("push_heavy_traffic_slope: y must be positive");
  if (y >= 1.0) return std::numeric_limits<double>::infinity();
  return -1.0 / std::log(y);
}

}  // namespace cavitylb
