#include <doctest.h>

#include <cmath>
#include <random>

#include "ctmc.hpp"
#include "error.hpp"
#include "linalg.hpp"

using namespace cavitylb;

namespace {

Generator birth_death(int n, double up, double down) {
  GeneratorBuilder b;
  for (int i = 0; i < n; ++i) b.add_state({i});
  for (int i = 0; i + 1 < n; ++i) {
    b.add_rate(i, i + 1, up);
    b.add_rate(i + 1, i, down);
  }
  return b.build();
}

// Oracle: replace one balance equation by the normalization and solve densely.
RowVector null_space_solve(const Matrix& q) {
  Matrix a = q;
  a.col(0).setOnes();
  RowVector rhs = RowVector::Zero(q.rows());
  rhs(0) = 1.0;
  return solve_left(a, rhs);
}

}  // namespace

TEST_CASE("two-state chain") {
  const double a = 0.7, b = 2.3;
  Matrix q(2, 2);
  q << -a, a, b, -b;
  const StationaryDist d = stationary(Generator(q, {{0}, {1}}));
  CHECK(d.pi(0) == doctest::Approx(b / (a + b)).epsilon(1e-15));
  CHECK(d.pi(1) == doctest::Approx(a / (a + b)).epsilon(1e-15));
}

TEST_CASE("birth-death detailed balance") {
  const Generator g = birth_death(4, 0.5, 1.0);
  const StationaryDist d = stationary(g);
  const double z = 1 + .5 + .25 + .125;
  CHECK(d.pi(0) == doctest::Approx(1 / z));
  CHECK(d.pi(1) == doctest::Approx(.5 / z));
  CHECK(d.pi(2) == doctest::Approx(.25 / z));
  CHECK(d.pi(3) == doctest::Approx(.125 / z));
  CHECK(stationary_residual(g, d) < 1e-15);
}

TEST_CASE("generator validation") {
  Matrix q(2, 2);
  q << -1, 1, 1, -0.5;
  CHECK_THROWS_AS(Generator(q, {{0}, {1}}), DomainError);
  q << 1, -1, 1, -1;
  CHECK_THROWS_AS(Generator(q, {{0}, {1}}), DomainError);
  GeneratorBuilder b;
  b.add_state({0});
  CHECK_THROWS_AS(b.add_rate(0, 0, -1.0), DomainError);
}

TEST_CASE("transient states get zero mass") {
  GeneratorBuilder b;
  for (int i = 0; i < 3; ++i) b.add_state({i});
  b.add_rate(0, 1, 1.0);
  b.add_rate(1, 2, 2.0);
  b.add_rate(2, 1, 3.0);
  const StationaryDist d = stationary(b.build());
  CHECK(d.pi(0) == 0.0);
  CHECK(d.pi(1) == doctest::Approx(0.6));
  CHECK(d.pi(2) == doctest::Approx(0.4));
}

TEST_CASE("two closed classes are rejected with state names") {
  GeneratorBuilder b;
  for (int i = 0; i < 3; ++i) b.add_state({i, 7});
  b.add_rate(0, 1, 1.0);
  b.add_rate(0, 2, 1.0);
  try {
    stationary(b.build());
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(1,7)") != std::string::npos);
    CHECK(msg.find("(2,7)") != std::string::npos);
  }
}

TEST_CASE("GTH agrees with a dense null-space solve on random generators") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> rate(0.0, 1.0);
  std::bernoulli_distribution keep(0.3);
  for (int n : {2, 5, 17, 60, 200}) {
    GeneratorBuilder b;
    for (int i = 0; i < n; ++i) b.add_state({i});
    for (int i = 0; i < n; ++i) {
      b.add_rate(i, (i + 1) % n, 0.1 + rate(rng));  // ring keeps it irreducible
      for (int j = 0; j < n; ++j)
        if (keep(rng)) b.add_rate(i, j, std::pow(10.0, -4 + 6 * rate(rng)));
    }
    const Generator g = b.build();
    const StationaryDist d = stationary(g);
    const RowVector oracle = null_space_solve(g.Q());
    CAPTURE(n);
    CHECK((d.pi - oracle).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(d.pi.sum() - 1) < 1e-10);
    CHECK(d.pi.minCoeff() >= 0.0);
    CHECK(stationary_residual(g, d) < 1e-9);
  }
}

TEST_CASE("marginal") {
  const StationaryDist d = stationary(birth_death(4, 0.5, 1.0));
  const auto all = marginal(d, [](const StateLabel&) { return 0; }, 1);
  CHECK(all[0] == doctest::Approx(1.0));
  const auto parity = marginal(d, [](const StateLabel& l) { return l.level % 2; }, 2);
  CHECK(parity[0] + parity[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(marginal(d, [](const StateLabel&) { return 3; }, 2), DomainError);
}

TEST_CASE("bisection") {
  CHECK(bisect_monotone([](double x) { return x; }, 0.3, 0, 1) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(bisect_monotone([](double x) { return std::exp(-x); }, 0.5, 0, 10) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK_THROWS_AS(bisect_monotone([](double x) { return x; }, 2.0, 0, 1), SolverError);
  const double hi = find_upper_bracket([](double x) { return 1 / (1 + x); }, 0.01);
  CHECK(hi >= 99.0);
  CHECK_THROWS_AS(find_upper_bracket([](double) { return 1.0; }, 0.5), SolverError);
}
