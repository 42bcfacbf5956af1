#include <doctest.h>

#include <cmath>
#include <vector>

#include "error.hpp"
#include "pull.hpp"

using namespace cavitylb;

namespace {

std::vector<PhaseType> catalog() {
  return {make_exponential(), make_erlang(3), make_hyperexp(20, 0.5),
          make_hyper_erlang(2, 5, 0.75), make_z_epsilon(0.1)};
}

PullParams table3(double lambda, double delta) { return PullParams::from_overall(lambda, delta, 0.0); }

}  // namespace

TEST_CASE("parameters") {
  const PullParams p = PullParams::from_overall(0.7, 0.2, 0.0);
  CHECK(p.delta0 == doctest::Approx(2.0 / 3));
  CHECK(p.delta() == doctest::Approx(0.2));
  const PullParams q = PullParams::from_overall(0.6, 0.3, 0.25);
  CHECK(q.delta() == doctest::Approx(0.3));
  CHECK_THROWS_AS(PullParams::from_overall(0.6, 0.3, 0.5), DomainError);
  CHECK_THROWS_AS(PullParams::from_overall(0.6, 0.3, 0.6), DomainError);
  CHECK_THROWS_AS((PullParams{0.6, 0.0, 0.1}.validate()), DomainError);
  CHECK_THROWS_AS((PullParams{0.6, 0.2, 1.1}.validate()), DomainError);
}

TEST_CASE("m tilde") {
  const double d = 0.2;
  CHECK(pull_m_tilde({0.7, d, d}) == doctest::Approx(std::log(0.3) / std::log(0.8)).epsilon(1e-13));
  CHECK(pull_m_tilde({0.7, d, d}) == doctest::Approx(5.3955).epsilon(1e-4));
  CHECK(pull_m_tilde(table3(0.75, 0.15)) == 5.0);
  // δ₁ close to 0 approaches λ/δ
  const PullParams tiny = PullParams::from_overall(0.75, 0.15, 1e-9);
  CHECK(pull_m_tilde(tiny) == doctest::Approx(5.0).epsilon(1e-7));
  for (double l : {0.2, 0.5}) CHECK(pull_m_tilde(PullParams::from_overall(l, 0.6, 1.0)) <= 1.0);
}

TEST_CASE("thresholds") {
  for (double d : {0.1, 0.4})
    for (int m = 1; m < 8; ++m)
      CHECK(pull_lambda_m(m, d, d) == doctest::Approx(1 - std::pow(1 - d, m)).epsilon(1e-13));
  // δ₁ = 0 with δ₀ = δ/(1−λ_m): λ_m = δm
  const double d = 0.15;
  for (int m = 1; m < 6; ++m) {
    const double lm = d * m;
    CHECK(pull_lambda_m(m, d / (1 - lm), 0.0) == doctest::Approx(lm).epsilon(1e-13));
  }
  for (double d1 : {0.0, 0.1, 0.5}) {
    const double d0 = 0.7;
    for (int m = 1; m < 10; ++m) {
      const double lm = pull_lambda_m(m, d0, d1);
      CHECK(std::abs(pull_m_tilde({lm, d0, d1}) - m) < 1e-9);
    }
  }
}

TEST_CASE("generator structure") {
  const PhaseType ph = make_hyper_erlang(2, 3, 0.4);
  const PullParams p{0.6, 0.5, 0.0};
  const int m = 4;
  const Generator g = pull_build_generator(p, ph, m, 0.7);
  CHECK(g.Q().rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  // with δ₁ = 0 only empty states jump to (m,m)
  for (int i = 0; i < g.size(); ++i) {
    const StateLabel& from = g.labels()[i];
    for (int k = 0; k < g.size(); ++k) {
      const StateLabel& to = g.labels()[k];
      if (i == k || g.Q()(i, k) == 0.0) continue;
      if (to.level == m && to.estimate == m && from.level < m - 1) CHECK(from.level == 0);
    }
  }
  const Generator g0 = pull_build_generator({0.6, 0.5, 0.3}, ph, m, 0.0);
  const StationaryDist d = stationary(g0);
  for (int i = 0; i < g0.size(); ++i)
    if (g0.labels()[i].estimate == m + 1) CHECK(d.pi(i) == 0.0);
  const Generator r = pull_build_generator_nu0({0.6, 0.5, 0.3}, ph, m);
  CHECK(r.Q().rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(pull_build_generator_nu0(p, ph, 0), DomainError);
  // m = 0: completions with an update land in (0,0)
  const Generator z = pull_build_generator({0.3, 0.5, 0.5}, make_exponential(), 0, 1.0);
  CHECK(z.size() == 3);
  CHECK(z.Q()(2, 0) == doctest::Approx(0.5));
  CHECK(z.Q()(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("cumulative closed form") {
  const double d = 0.3;
  const auto eq = pull_cumulative({0.5, d, d}, 6);
  for (int i = 1; i <= 7; ++i) CHECK(eq[i - 1] == doctest::Approx(std::pow(1 - d, 6 - i + 1)).epsilon(1e-13));
  const double d0 = 0.6;
  const auto idle = pull_cumulative({0.5, d0, 0.0}, 5);
  for (int i = 1; i <= 6; ++i)
    CHECK(idle[i - 1] == doctest::Approx((i - 1 + 1 / d0) / (5 + 1 / d0)).epsilon(1e-13));

  struct Case {
    PhaseType ph;
    PullParams p;
    int m;
  };
  const std::vector<Case> cases = {{make_erlang(3), {0.5, 0.6, 0.0}, 5},
                                   {make_hyperexp(10, 0.5), {0.5, 0.4, 0.2}, 7},
                                   {make_hyper_erlang(2, 5, 0.75), {0.5, 1.3, 0.9}, 3},
                                   {make_z_epsilon(0.05), {0.5, 0.2, 0.05}, 9}};
  for (const Case& c : cases) {
    const auto closed = pull_cumulative(c.p, c.m);
    const StationaryDist dist = stationary(pull_build_generator_nu0(c.p, c.ph, c.m));
    const auto q = marginal(dist, [](const StateLabel& l) { return l.level; }, c.m + 1);
    double cum = 0.0;
    for (int i = 1; i <= c.m + 1; ++i) {
      cum += q[i - 1];
      CHECK(std::abs(closed[i - 1] - cum) < 1e-10);
    }
  }
}

TEST_CASE("table 3 cavity values") {
  CHECK(std::abs(pull_solve(table3(0.7, 0.2), make_exponential()).mean_response - 2.0816) < 1e-4);
  CHECK(std::abs(pull_solve(table3(0.9, 0.4), make_hyperexp(20, 0.5)).mean_response - 1.8726) < 1e-4);
  const PullSolution e3 = pull_solve(table3(0.75, 0.15), make_erlang(3));
  CHECK(e3.nu == 0.0);
  CHECK(std::abs(e3.mean_response - 3.0) < 1e-9);
  CHECK(std::abs(pull_solve(table3(0.75, 0.5), make_hyper_erlang(2, 5, 0.75)).mean_response - 1.1839) < 1e-4);
}

TEST_CASE("mean queue closed forms") {
  const double d = 0.25;
  for (int m = 0; m < 8; ++m)
    CHECK(pull_mean_queue_at(m, d, d) ==
          doctest::Approx((m + 1) - (1 - std::pow(1 - d, m + 1)) / d).epsilon(1e-12));
  const PullParams p = table3(0.75, 0.15);
  CHECK(pull_mean_queue_at(5, p.delta0, 0.0) == doctest::Approx(2.25));
  const MeanQueueBounds b = pull_mean_queue_bounds(p);
  CHECK(b.lower == doctest::Approx(2.25));
  CHECK(b.upper == doctest::Approx(2.25));
}

TEST_CASE("grid: fixed point, residual, bounds, insensitive m") {
  for (double lambda : {0.3, 0.6, 0.85, 0.95}) {
    for (double delta : {0.15, 0.5}) {
      for (double frac : {0.0, 0.3, 0.9}) {
        const double d1 = frac * std::min(1.0, delta / lambda);
        const PullParams p = PullParams::from_overall(lambda, delta, d1);
        double mt = -1;
        for (const PhaseType& ph : catalog()) {
          CAPTURE(ph.label());
          CAPTURE(lambda);
          CAPTURE(delta);
          CAPTURE(d1);
          const PullSolution s = pull_solve(p, ph);
          if (mt >= 0) CHECK(s.m_tilde == mt);
          mt = s.m_tilde;
          CHECK(std::abs(s.q_marginal[0] - (1 - lambda)) < 1e-8);
          CHECK(pull_rate_residual(s, ph) < 1e-8);
          CHECK(s.bounds.lower <= s.mean_queue + 1e-9);
          // Z(ε) is excluded here, see the next test case
          if (ph.label().rfind("Z(", 0) != 0) CHECK(s.mean_queue <= s.bounds.upper + 1e-9);
          int support = 0;
          for (int q = 0; q < static_cast<int>(s.q_marginal.size()); ++q)
            if (s.q_marginal[q] > 1e-13) support = q;
          CHECK(support == s.max_queue);
        }
      }
    }
  }
}

TEST_CASE("upper mean-queue bound is exceeded by strongly bimodal job sizes") {
  // λ=0.95, δ=0.5, δ₁=0: ⌈m̃⌉ = 2, bound q(2) = 10/7.
  const PullParams p = PullParams::from_overall(0.95, 0.5, 0.0);
  const MeanQueueBounds b = pull_mean_queue_bounds(p);
  CHECK(b.upper == doctest::Approx(10.0 / 7).epsilon(1e-12));
  double prev = 0.0;
  for (double eps : {0.5, 0.2, 0.1, 0.05, 0.01}) {
    const PhaseType ph = make_z_epsilon(eps);
    const PullSolution s = pull_solve(p, ph);
    CHECK(std::abs(s.q_marginal[0] - 0.05) < 1e-10);
    CHECK(pull_rate_residual(s, ph) < 1e-10);
    CHECK(s.mean_queue > prev);
    prev = s.mean_queue;
    if (eps <= 0.1) CHECK(s.mean_queue > b.upper + 1e-3);
  }
  CHECK(prev == doctest::Approx(1.446673).epsilon(1e-6));
}

TEST_CASE("whole distribution is insensitive at integer levels") {
  for (double d1 : {0.0, 0.3}) {
    const double d0 = 0.5;
    const double lm = pull_lambda_m(4, d0, d1);
    std::vector<double> ref;
    for (const PhaseType& ph : catalog()) {
      const PullSolution s = pull_solve({lm, d0, d1}, ph);
      CHECK(s.nu == 0.0);
      if (ref.empty()) {
        ref = s.q_marginal;
        continue;
      }
      for (std::size_t q = 0; q < ref.size(); ++q) CHECK(std::abs(s.q_marginal[q] - ref[q]) < 1e-8);
    }
  }
}

TEST_CASE("m tilde increases in delta1 at fixed overall rate") {
  const double lambda = 0.8, delta = 0.5;
  double prev = 0.0;
  for (double d1 = 0.0; d1 < delta / lambda - 1e-3; d1 += 0.05) {
    const double mt = pull_m_tilde(PullParams::from_overall(lambda, delta, d1));
    CHECK(mt > prev);
    prev = mt;
  }
}

TEST_CASE("heavy traffic") {
  CHECK(pull_heavy_traffic_slope(0.5) == doctest::Approx(1 / std::log(2.0)));
  CHECK(pull_heavy_traffic_slope(0.0) == 0.0);
  // δ₁ = 0: m̃ → 1/δ, bounded
  CHECK(pull_m_tilde(PullParams::from_overall(1 - 1e-8, 0.4, 0.0)) == doctest::Approx(2.5).epsilon(1e-7));
  for (double delta : {0.15, 0.5, 0.7}) {
    const double lambda = 1 - 1e-8;
    const PullParams p{lambda, delta, delta};
    const double ratio = pull_m_tilde(p) / std::log(1 / (1 - lambda * p.delta1 / p.delta()));
    CHECK(std::abs(ratio / pull_heavy_traffic_slope(delta) - 1) < 0.02);
  }
  // (E[R]−1)/m̃ → 1 with δ₀ = δ₁ = δ; the gap closes like 1/(δ m̃)
  const PhaseType ph = make_hyperexp(10, 0.5);
  for (double delta : {0.15, 0.5, 0.7}) {
    double prev = 0.0;
    for (double eps : {1e-3, 1e-5, 1e-7, 1e-9}) {
      const PullSolution s = pull_solve({1 - eps, delta, delta}, ph);
      const double ratio = (s.mean_response - 1) / s.m_tilde;
      CHECK(ratio > prev);
      CHECK(ratio < 1.0);
      CHECK(std::abs(ratio - (1 - 1 / (delta * s.m_tilde))) < 0.035);
      prev = ratio;
    }
  }
}
