// Exercises the shared library through its C interface only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "cavitylb/cavitylb.h"

using nlohmann::json;

namespace {

struct Ph {
  clb_ph* h = nullptr;
  explicit Ph(const char* spec) { REQUIRE(clb_ph_parse(spec, &h) == CLB_OK); }
  ~Ph() { clb_ph_free(h); }
};

struct Sol {
  clb_solution* h = nullptr;
  ~Sol() { clb_solution_free(h); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  clb_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(clb_status_name(CLB_OK)) == "ok");
  CHECK(std::string(clb_status_name(CLB_PARSE_ERROR)) == "parse error");
  CHECK(std::string(clb_version()).size() > 0);
}

TEST_CASE("phase-type handles") {
  Ph e("exponential");
  int n = 0;
  double mean = 0, scv = 0, y = 0;
  CHECK(clb_ph_phases(e.h, &n) == CLB_OK);
  CHECK(n == 1);
  CHECK(clb_ph_mean(e.h, &mean) == CLB_OK);
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(clb_ph_timer_y(e.h, 0.3, &y) == CLB_OK);
  CHECK(y == doctest::Approx(1 / 1.3).epsilon(1e-14));

  Ph h("hyperexp:10,0.5");
  CHECK(clb_ph_scv(h.h, &scv) == CLB_OK);
  CHECK(scv == doctest::Approx(10.0).epsilon(1e-12));
  Ph k("erlang:4");
  CHECK(clb_ph_phases(k.h, &n) == CLB_OK);
  CHECK(n == 4);
  CHECK(clb_ph_scv(k.h, &scv) == CLB_OK);
  CHECK(scv == doctest::Approx(0.25).epsilon(1e-12));

  const double alpha[2] = {0.5, 0.5};
  const double S[4] = {-2.0, 0.0, 0.0, -2.0 / 3.0};
  clb_ph* c = nullptr;
  REQUIRE(clb_ph_create(alpha, S, 2, "custom", &c) == CLB_OK);
  CHECK(clb_ph_mean(c, &mean) == CLB_OK);
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-14));
  char* js = nullptr;
  REQUIRE(clb_ph_to_json(c, &js) == CLB_OK);
  const json j = json::parse(take(js));
  CHECK(j["label"] == "custom");
  CHECK(j["S"][1][1].get<double>() == doctest::Approx(-2.0 / 3.0));
  clb_ph_free(c);
}

TEST_CASE("phase-type errors") {
  clb_ph* p = nullptr;
  CHECK(clb_ph_parse("weibull:2", &p) == CLB_PARSE_ERROR);
  CHECK(p == nullptr);
  CHECK(std::string(clb_last_error()).find("weibull") != std::string::npos);
  CHECK(clb_ph_parse("erlang:x", &p) == CLB_PARSE_ERROR);
  CHECK(clb_ph_parse("file:/nonexistent/ph.json", &p) == CLB_IO_ERROR);
  CHECK(clb_ph_parse(nullptr, &p) == CLB_INVALID_ARGUMENT);
  CHECK(clb_ph_parse("exponential", nullptr) == CLB_INVALID_ARGUMENT);

  const double alpha[1] = {1.0};
  const double bad[1] = {1.0};
  CHECK(clb_ph_create(alpha, bad, 1, nullptr, &p) == CLB_INVALID_ARGUMENT);
  CHECK(clb_ph_create(alpha, bad, 0, nullptr, &p) == CLB_INVALID_ARGUMENT);

  int n = 0;
  CHECK(clb_ph_phases(nullptr, &n) == CLB_INVALID_ARGUMENT);
}

TEST_CASE("phase type from a JSON file") {
  const std::string path = "capi_ph_test.json";
  {
    std::ofstream out(path);
    out << R"({"alpha": [1, 0], "S": [[-2, 2], [0, -2]], "label": "two-stage"})";
  }
  const std::string spec = "file:" + path;
  Ph p(spec.c_str());
  double scv = 0;
  CHECK(clb_ph_scv(p.h, &scv) == CLB_OK);
  CHECK(scv == doctest::Approx(0.5).epsilon(1e-12));
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "{not json";
  }
  clb_ph* q = nullptr;
  CHECK(clb_ph_parse(spec.c_str(), &q) == CLB_PARSE_ERROR);
  std::remove(path.c_str());
}

TEST_CASE("push solution accessors") {
  Ph e("exponential");
  Sol s;
  REQUIRE(clb_solve_push(e.h, 0.9, 0.3, &s.h) == CLB_OK);
  clb_policy pol;
  double er = 0, eq = 0, mt = 0, nu = 0, lo = 0, hi = 0, res = 1;
  int mq = 0;
  CHECK(clb_solution_policy(s.h, &pol) == CLB_OK);
  CHECK(pol == CLB_PUSH);
  CHECK(clb_solution_mean_response(s.h, &er) == CLB_OK);
  CHECK(er == doctest::Approx(6.0081).epsilon(1e-4));
  CHECK(clb_solution_mean_queue(s.h, &eq) == CLB_OK);
  CHECK(eq == doctest::Approx(0.9 * er).epsilon(1e-12));
  CHECK(clb_solution_m_tilde(s.h, &mt) == CLB_OK);
  CHECK(mt == doctest::Approx(8.7763).epsilon(1e-4));
  CHECK(clb_solution_max_queue(s.h, &mq) == CLB_OK);
  CHECK(mq == 9);
  CHECK(clb_solution_rate(s.h, &nu) == CLB_OK);
  CHECK(nu >= 0.0);
  CHECK(clb_solution_bounds(s.h, &lo, &hi) == CLB_OK);
  CHECK(lo <= eq + 1e-12);
  CHECK(eq <= hi + 1e-12);
  CHECK(clb_solution_residual(s.h, &res) == CLB_OK);
  CHECK(res < 1e-9);

  size_t size = 0;
  CHECK(clb_solution_q_marginal(s.h, nullptr, 0, &size) == CLB_OK);
  CHECK(size == 10);
  std::vector<double> q(size + 3, -1.0);
  CHECK(clb_solution_q_marginal(s.h, q.data(), q.size(), &size) == CLB_OK);
  CHECK(q[0] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(q[size] == -1.0);
  double first = 0;
  CHECK(clb_solution_q_marginal(s.h, &first, 1, &size) == CLB_OK);
  CHECK(first == q[0]);
  CHECK(clb_solution_q_marginal(s.h, nullptr, 2, &size) == CLB_INVALID_ARGUMENT);
}

TEST_CASE("solution JSON") {
  Ph e("erlang:3");
  Sol s;
  REQUIRE(clb_solve_pull(e.h, 0.75, 1.0, 0.0, &s.h) == CLB_OK);
  double er = 0;
  CHECK(clb_solution_mean_response(s.h, &er) == CLB_OK);
  char* out = nullptr;
  REQUIRE(clb_solution_to_json(s.h, 0, &out) == CLB_OK);
  const std::string text = take(out);
  const json j = json::parse(text);
  CHECK(j["mean_response"].get<double>() == er);
  CHECK(j.dump() == json::parse(j.dump()).dump());
  CHECK_FALSE(j.contains("stationary"));
  REQUIRE(clb_solution_to_json(s.h, 1, &out) == CLB_OK);
  CHECK(json::parse(take(out)).contains("stationary"));
}

TEST_CASE("solver statuses") {
  Ph e("exponential");
  Sol s;
  CHECK(clb_solve_push(e.h, 1.2, 0.3, &s.h) == CLB_INVALID_ARGUMENT);
  CHECK(s.h == nullptr);
  CHECK(std::string(clb_last_error()).find("lambda") != std::string::npos);
  CHECK(clb_solve_push(e.h, 0.5, -1.0, &s.h) == CLB_INVALID_ARGUMENT);
  CHECK(clb_solve_pooling(e.h, 0.5, 1.0, &s.h) == CLB_INVALID_ARGUMENT);
  CHECK(clb_solve_waterfill(nullptr, 0.5, 0.5, &s.h) == CLB_INVALID_ARGUMENT);

  REQUIRE(clb_solve_pooling(e.h, 0.9, 0.5, &s.h) == CLB_OK);
  double lo = 0, hi = 0, res = 1;
  CHECK(clb_solution_bounds(s.h, &lo, &hi) == CLB_INVALID_ARGUMENT);
  CHECK(clb_solution_residual(s.h, &res) == CLB_OK);
  CHECK(res < 1e-8);

  Sol w;
  REQUIRE(clb_solve_waterfill(e.h, 0.8, 0.4, &w.h) == CLB_OK);
  CHECK(clb_solution_residual(w.h, &res) == CLB_OK);
  CHECK(res < 1e-9);

  double d0 = 0;
  CHECK(clb_pull_delta0(0.8, 0.4, 0.25, &d0) == CLB_OK);
  CHECK(d0 == doctest::Approx((0.4 - 0.8 * 0.25) / 0.2).epsilon(1e-12));
  CHECK(clb_pull_delta0(0.8, 0.4, 0.6, &d0) == CLB_INVALID_ARGUMENT);
}

TEST_CASE("aggregate and simulation") {
  const double v[3] = {1.0, 2.0, 3.0};
  double mean = 0, hw = 0;
  CHECK(clb_aggregate(v, 3, &mean, &hw) == CLB_OK);
  CHECK(mean == 2.0);
  CHECK(std::abs(hw - 2.4843) < 1e-3);
  CHECK(clb_aggregate(v, 1, &mean, &hw) == CLB_INVALID_ARGUMENT);

  const char* cfg =
      R"({"policy": "waterfill", "lambda": 0.8, "delta": 0.4, "ph": "erlang:3",
          "N": 100, "arrivals_total": 20000, "runs": 3, "seed": 5, "threads": 1})";
  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(clb_simulate_json(cfg, &a) == CLB_OK);
  REQUIRE(clb_simulate_json(cfg, &b) == CLB_OK);
  const std::string ta = take(a), tb = take(b);
  CHECK(ta == tb);
  const json r = json::parse(ta);
  CHECK(r["policy"] == "waterfill");
  CHECK(r["M"] == 40);
  CHECK(r["d"] == 20);
  CHECK(r["per_run_means"].size() == 3);

  CHECK(clb_simulate_json("{\"policy\": ", &a) == CLB_PARSE_ERROR);
  CHECK(clb_simulate_json(R"({"policy": "random", "lambda": 0.5})", &a) == CLB_PARSE_ERROR);
  CHECK(clb_simulate_json(R"({"policy": "push", "lambda": 1.5, "delta": 0.3})", &a) ==
        CLB_INVALID_ARGUMENT);
}

TEST_CASE("table rows") {
  char* out = nullptr;
  REQUIRE(clb_table_rows_json(4, &out) == CLB_OK);
  const json rows = json::parse(take(out));
  REQUIRE(rows.size() == 16);
  const double expect[4] = {1.3958, 1.0699, 1.2588, 2.0320};
  for (int s = 0; s < 4; ++s) {
    CAPTURE(s);
    const json& row = rows[s * 4];
    CHECK(row["cavity"].get<double>() == doctest::Approx(expect[s]).epsilon(1e-4));
    CHECK(row["published_limit"].get<double>() == doctest::Approx(expect[s]).epsilon(1e-4));
  }
  CHECK(clb_table_rows_json(5, &out) == CLB_INVALID_ARGUMENT);
}
