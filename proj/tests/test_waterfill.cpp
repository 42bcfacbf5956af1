#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "error.hpp"
#include "push.hpp"
#include "waterfill.hpp"

using namespace cavitylb;

namespace {

struct Row {
  PhaseType ph;
  double lambda;
  double delta;
  double er;
};

std::vector<Row> table2() {
  return {{make_exponential(), 0.8, 0.4, 3.5136},
          {make_hyperexp(10, 0.5), 0.8, 0.4, 4.5947},
          {make_erlang(3), 0.75, 1.2, 1.4968},
          {make_hyper_erlang(3, 5, 0.6), 0.8, 1.2, 1.5708}};
}

}  // namespace

TEST_CASE("c = 0 reproduces the push chain without assignments") {
  const PhaseType ph = make_hyper_erlang(2, 3, 0.3);
  const double lambda = 0.7, delta = 0.45;
  for (int m : {1, 2, 5}) {
    const Generator w = wf_build_generator({lambda, delta}, ph, m, 0.0);
    const Generator p = push_build_generator_nu0({lambda, delta}, ph, m);
    const int n = p.size();
    CHECK(w.size() == n + ph.phases());
    CHECK((w.Q().topLeftCorner(n, n) - p.Q()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.Q().block(0, n, n, ph.phases()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("(m,1) equals (m+1,0) restricted to reachable levels") {
  const PhaseType ph = make_hyperexp(4, 0.4);
  for (int m : {0, 1, 3}) {
    const Generator a = wf_build_generator({0.6, 0.8}, ph, m, 1.0);
    const Generator b = wf_build_generator({0.6, 0.8}, ph, m + 1, 0.0);
    const int n = a.size();
    CHECK((b.Q().topLeftCorner(n, n) - a.Q()).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("generator rows sum to zero") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const PhaseType ph = make_hyper_erlang(1 + t % 3, 2 + t % 4, u(rng));
    const Generator g = wf_build_generator({0.5, 0.1 + u(rng)}, ph, t % 6, u(rng));
    CHECK(g.Q().rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("exponential c and closed forms") {
  const WaterfillParams p{0.8, 0.4};
  const int m = 4;
  const double c_exact = 1 / (0.4 * 0.2 * std::pow(1.4, m)) - 1 / 0.4;
  CHECK(c_exact == doctest::Approx(0.75385).epsilon(1e-5));
  CHECK(std::abs(wf_find_c(p, make_exponential(), m) - c_exact) < 1e-10);
  CHECK(std::abs(wf_find_c_numeric(p, make_exponential(), m) - c_exact) < 1e-10);

  const auto pi = wf_closed_form_dist(p, make_exponential(), m, c_exact);
  for (int k = 1; k <= m; ++k) CHECK(pi[k] == doctest::Approx(std::pow(1.4, k - 1) * 0.4 * 0.2));
  CHECK(pi[m + 1] == doctest::Approx(1 - 0.2 * std::pow(1.4, m)));
  double total = 0;
  for (double v : pi) total += v;
  CHECK(total == doctest::Approx(1.0));

  // hand-evaluated marginal
  const std::vector<double> expect = {0.2, 0.08, 0.112, 0.1568, 0.21952, 0.23168};
  for (int k = 0; k <= m + 1; ++k) CHECK(pi[k] == doctest::Approx(expect[k]).epsilon(1e-12));
}

TEST_CASE("table 2 cavity values") {
  for (const Row& r : table2()) {
    CAPTURE(r.ph.label());
    const WaterfillSolution s = wf_solve({r.lambda, r.delta}, r.ph);
    CHECK(std::abs(s.mean_response - r.er) < 1e-4);
    CHECK(std::abs(s.c - s.c_formula) < 1e-8);
    const auto closed = wf_closed_form_dist({r.lambda, r.delta}, r.ph, s.m, s.c);
    for (int q = 0; q <= s.m + 1; ++q) CHECK(std::abs(closed[q] - s.q_marginal[q]) < 1e-9);
  }
  CHECK(std::abs(wf_solve({0.8, 0.4}, make_exponential()).mean_response - 3.5136) < 1e-9);
}

TEST_CASE("integer level boundary gives c = 0") {
  const PhaseType ph = make_erlang(3);
  const double d = 0.6;
  const double lm = push_lambda_m(3, d, timer_stats(ph, d).y);
  const WaterfillSolution s = wf_solve({lm, d}, ph);
  CHECK(s.m == 3);
  CHECK(s.c == 0.0);
  CHECK(wf_find_c({lm, d}, ph, 3) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(s.q_marginal[0] - (1 - lm)) < 1e-8);
  CHECK(s.q_marginal[4] == 0.0);
}

TEST_CASE("wrong m has no root") {
  const WaterfillParams p{0.8, 0.4};
  CHECK_THROWS_AS(wf_find_c(p, make_exponential(), 2), SolverError);
  CHECK_THROWS_AS(wf_find_c(p, make_exponential(), 6), SolverError);
}

TEST_CASE("grid: fixed point, m agreement, closed forms, bounds") {
  const std::vector<PhaseType> phs = {make_exponential(), make_erlang(4), make_hyperexp(10, 0.5),
                                      make_hyper_erlang(3, 5, 0.6), make_z_epsilon(0.05)};
  for (const PhaseType& ph : phs) {
    for (double lambda : {0.3, 0.55, 0.8, 0.95}) {
      for (double delta : {0.2, 0.6, 1.5, 4.0}) {
        CAPTURE(ph.label());
        CAPTURE(lambda);
        CAPTURE(delta);
        const WaterfillSolution s = wf_solve({lambda, delta}, ph);
        const double y = timer_stats(ph, delta).y;
        CHECK(s.m == static_cast<int>(std::floor(push_m_tilde({lambda, delta}, y))));
        CHECK(std::abs(s.q_marginal[0] - (1 - lambda)) < 1e-8);
        CHECK(std::abs(s.c - s.c_formula) < 1e-8);
        CHECK(s.c >= 0.0);
        CHECK(s.c < 1.0);
        const auto closed = wf_closed_form_dist({lambda, delta}, ph, s.m, s.c);
        for (int q = 0; q <= s.m + 1; ++q) CHECK(std::abs(closed[q] - s.q_marginal[q]) < 1e-9);
        CHECK(s.bounds.lower <= s.mean_queue + 1e-9);
        CHECK(s.mean_queue <= s.bounds.upper + 1e-9);
        CHECK(s.bounds.upper - s.bounds.lower < 1.0);
        CHECK(s.mean_response == doctest::Approx(s.mean_queue / lambda));
      }
    }
  }
}

TEST_CASE("empty probability decreases in c") {
  const PhaseType ph = make_hyperexp(10, 0.5);
  for (int m : {0, 1, 4}) {
    double prev = 2.0;
    for (double c : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
      const StationaryDist d = stationary(wf_build_generator({0.8, 0.4}, ph, m, c));
      const double p0 = d.pi(0);
      CHECK(p0 < prev);
      prev = p0;
    }
  }
}
