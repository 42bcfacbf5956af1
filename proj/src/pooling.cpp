#include "pooling.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <functional>

#include "error.hpp"
#include "estimate_space.hpp"

namespace cavitylb {

using detail::LevelSpace;

namespace {

constexpr int kMaxLevel = 100000;
constexpr double kBoundaryTol = 1e-12;

double target_idle(const PoolingParams& p) { return (1.0 - p.lambda) / (1.0 - p.p); }

void require_general(const PoolingParams& params) {
  if (!(params.lambda > params.p)) throw DomainError("pooling: requires lambda > p");
  if (!(params.p > 0.0)) throw DomainError("pooling: p = 0 leaves the queue length unbounded");
}

}  // namespace

void PoolingParams::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("pooling: lambda must lie in (0,1)");
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("pooling: p must lie in [0,1)");
}

std::string to_string(PoolingRegime r) {
  switch (r) {
    case PoolingRegime::CentralOnly:
      return "central-only";
    case PoolingRegime::SingleSlot:
      return "single-slot";
    case PoolingRegime::General:
      return "general";
  }
  return "unknown";
}

double pooling_single_slot_threshold(double lambda) {
  return (1.0 + lambda - std::sqrt(1.0 + 2.0 * lambda - 3.0 * lambda * lambda)) / 2.0;
}

PoolingRegime pooling_regime(const PoolingParams& params) {
  params.validate();
  if (params.lambda <= params.p) return PoolingRegime::CentralOnly;
  if (params.p >= pooling_single_slot_threshold(params.lambda)) return PoolingRegime::SingleSlot;
  return PoolingRegime::General;
}

Matrix pooling_R(const PoolingParams& params, const PhaseType& ph) {
  params.validate();
  const int n = ph.phases();
  const double l = params.lambda;
  const Matrix a = l * Matrix::Identity(n, n) - (1.0 - params.p) * ph.S() -
                   l * Vector::Ones(n) * ph.alpha();
  return l * a.partialPivLu().inverse();
}

double pooling_idle_prob_truncated(const PoolingParams& params, const PhaseType& ph, int m) {
  params.validate();
  if (m < 0) throw DomainError("pooling: m must be nonnegative");
  if (m == 0) return 1.0;
  const int n = ph.phases();
  const Matrix r = pooling_R(params, ph);
  RowVector v = ph.alpha();  // αR^i
  double total = 0.0;
  for (int i = 0; i < m - 1; ++i) {
    total += v.sum();
    v = v * r;
  }
  total += v.sum();  // i = m−1
  const Vector t = solve_right(-(1.0 - params.p) * ph.S(), Vector::Ones(n));
  total += params.lambda * v.dot(t);
  return 1.0 / total;
}

int pooling_find_m(const PoolingParams& params, const PhaseType& ph) {
  params.validate();
  require_general(params);
  const double target = target_idle(params);
  const int n = ph.phases();
  const Matrix r = pooling_R(params, ph);
  const Vector t = solve_right(-(1.0 - params.p) * ph.S(), Vector::Ones(n));
  // running Σ_{i<m−1} αR^i·1 and αR^{m−1}
  double partial = 0.0;
  RowVector v = ph.alpha();
  for (int m = 1; m <= kMaxLevel; ++m) {
    const double idle = 1.0 / (partial + v.sum() + params.lambda * v.dot(t));
    // on an exact boundary π₀(m,∞) = target, so the tolerance keeps rounding
    // from picking m one too high (ω would then have to be infinite)
    if (!(idle > target * (1.0 + kBoundaryTol))) return m - 1;
    partial += v.sum();
    v = v * r;
  }
  throw SolverError("pooling: no level found below 1e5");
}

Generator pooling_build_generator(const PoolingParams& params, const PhaseType& ph, int m,
                                  double omega) {
  params.validate();
  if (m < 0) throw DomainError("pooling: m must be nonnegative");
  if (!(omega >= 0.0) || !std::isfinite(omega))
    throw DomainError("pooling: omega must be nonnegative");
  const int n = ph.phases();
  const LevelSpace sp{m + 1, n, -1};
  const double l = params.lambda;
  const double mu = 1.0 - params.p;
  const RowVector& alpha = ph.alpha();
  const Matrix& s = ph.S();
  const Vector& exit = ph.exit_rates();

  GeneratorBuilder b = sp.make_builder();
  for (int k = 0; k < n; ++k) b.add_rate(0, sp.at(1, k), l * alpha(k));
  for (int q = 1; q <= m + 1; ++q) {
    for (int j = 0; j < n; ++j) {
      const int from = sp.at(q, j);
      for (int k = 0; k < n; ++k)
        if (k != j) b.add_rate(from, sp.at(q, k), mu * s(j, k));
      if (q == 1)
        b.add_rate(from, 0, mu * exit(j));
      else
        for (int k = 0; k < n; ++k) b.add_rate(from, sp.at(q - 1, k), mu * exit(j) * alpha(k));
      if (q <= m) b.add_rate(from, sp.at(q + 1, j), l);
      if (q == m + 1) b.add_rate(from, sp.at(m, j), omega);
    }
  }
  return b.build();
}

std::vector<double> pooling_lower_levels(const PoolingParams& params, const PhaseType& ph, int m) {
  const Matrix r = pooling_R(params, ph);
  const double target = target_idle(params);
  std::vector<double> out;
  RowVector v = ph.alpha();
  for (int q = 1; q < m; ++q) {
    v = v * r;
    out.push_back(target * v.sum());
  }
  return out;
}

std::array<double, 2> pooling_top_levels(const PoolingParams& params, const PhaseType& ph, int m,
                                         double omega) {
  if (m < 1) throw DomainError("pooling_top_levels: m must be positive");
  const int n = ph.phases();
  const double l = params.lambda;
  const double mu = 1.0 - params.p;
  const Matrix r = pooling_R(params, ph);
  const double target = target_idle(params);
  // vector of level m−1 (the scalar idle state spread over α when m = 1)
  RowVector below = target * ph.alpha();
  for (int q = 1; q < m; ++q) below = below * r;
  const Matrix id = Matrix::Identity(n, n);
  Matrix blk(2 * n, 2 * n);
  blk << mu * ph.S() - l * id, l * id,  //
      mu * ph.exit_rates() * ph.alpha() + omega * id, mu * ph.S() - omega * id;
  RowVector rhs = RowVector::Zero(2 * n);
  rhs.head(n) = -l * below;
  const RowVector x = solve_left(blk, rhs);
  return {x.head(n).sum(), x.tail(n).sum()};
}

PoolingSolution pooling_solve(const PoolingParams& params, const PhaseType& ph) {
  params.validate();
  ph.require_unit_mean();
  PoolingSolution sol;
  sol.params = params;
  sol.regime = pooling_regime(params);

  if (sol.regime == PoolingRegime::CentralOnly) {
    GeneratorBuilder b;
    b.add_state({0, -1, -1});
    sol.dist = stationary(b.build());
    sol.q_marginal = {1.0};
    return sol;
  }
  require_general(params);

  sol.m = pooling_find_m(params, ph);
  sol.max_queue = sol.m + 1;
  // With m ≥ 1 the central server only takes pending jobs, so busy servers
  // complete work at rate 1−p and the idle mass is pinned; solving for it is
  // then equivalent to the token balance. With m = 0 it takes the job in
  // service, which breaks that equivalence unless jobs are exponential, so
  // the token balance itself is solved.
  double target = target_idle(params);
  std::function<double(double)> f = [&](double omega) {
    const StationaryDist d = stationary(pooling_build_generator(params, ph, sol.m, omega));
    return d.pi(0);
  };
  if (sol.m == 0) {
    target = params.p;
    f = [&](double omega) {
      const StationaryDist d = stationary(pooling_build_generator(params, ph, 0, omega));
      return (omega + params.lambda) * (1.0 - d.pi(0));
    };
  }
  if (f(0.0) >= target * (1.0 - kBoundaryTol)) {
    sol.omega = 0.0;
  } else {
    const double hi = find_upper_bracket(f, target);
    sol.omega = bisect_monotone(f, target, 0.0, hi, 1e-13);
  }
  sol.dist = stationary(pooling_build_generator(params, ph, sol.m, sol.omega));
  sol.q_marginal =
      marginal(sol.dist, [](const StateLabel& l) { return l.level; }, sol.m + 2);
  double eq = 0.0;
  for (int q = 0; q < sol.m + 2; ++q) eq += q * sol.q_marginal[q];
  sol.mean_queue = eq;
  sol.mean_response = eq / params.lambda;
  return sol;
}

double pooling_token_residual(const PoolingSolution& sol) {
  if (sol.regime == PoolingRegime::CentralOnly) return 0.0;
  const double top = sol.q_marginal.back();
  return std::abs(sol.omega * top - (sol.params.p - sol.params.lambda * top));
}

double pooling_md1_idle_prob(double rho, int n) {
  using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<1000>>;
  if (n < 1) throw DomainError("pooling_md1_idle_prob: n must be positive");
  if (!(rho > 0.0)) throw DomainError("pooling_md1_idle_prob: rho must be positive");
  // the alternating terms cancel down to O(1); 1000 bits leave ~280 digits of headroom
  double peak = 0.0;
  for (int k = 1; k < n; ++k) {
    const double a = n - 1 - k;
    if (a > 0) peak = std::max(peak, (k * std::log(a * rho) + a * rho - std::lgamma(k + 1.0)) / std::log(10.0));
  }
  if (peak > 280.0) throw SolverError("pooling_md1_idle_prob: n too large for extended precision");
  const Big r(rho);
  Big sum = 0;
  Big fact = 1;
  for (int k = 0; k < n; ++k) {
    if (k > 0) fact *= k;
    const int a = n - 1 - k;
    Big term = k == 0 ? Big(1) : boost::multiprecision::pow(Big(a) * r, k) / fact;
    term *= boost::multiprecision::exp(Big(a) * r);
    if (k % 2 == 1) term = -term;
    sum += term;
  }
  return static_cast<double>(1 / (1 + r * sum));
}

int pooling_deterministic_min_m(const PoolingParams& params) {
  params.validate();
  require_general(params);
  const double rho = params.lambda / (1.0 - params.p);
  const double target = target_idle(params);
  for (int n = 1;; ++n)
    if (pooling_md1_idle_prob(rho, n) < target) return n - 1;
}

}  // namespace cavitylb
