#include "cavitylb/cavitylb.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <string>
#include <variant>

#include "error.hpp"
#include "json_io.hpp"
#include "tables.hpp"

using namespace cavitylb;

struct clb_ph {
  PhaseType ph;
};

struct clb_solution {
  std::variant<PushSolution, PullSolution, WaterfillSolution, PoolingSolution> s;
  PhaseType ph;
};

namespace {

thread_local std::string g_error;

template <typename F>
clb_status guard(F&& f) {
  try {
    g_error.clear();
    f();
    return CLB_OK;
  } catch (const ParseError& e) {
    g_error = e.what();
    return CLB_PARSE_ERROR;
  } catch (const DomainError& e) {
    g_error = e.what();
    return CLB_INVALID_ARGUMENT;
  } catch (const IoError& e) {
    g_error = e.what();
    return CLB_IO_ERROR;
  } catch (const SolverError& e) {
    g_error = e.what();
    return CLB_SOLVER_ERROR;
  } catch (const std::exception& e) {
    g_error = e.what();
    return CLB_INTERNAL_ERROR;
  } catch (...) {
    g_error = "unknown error";
    return CLB_INTERNAL_ERROR;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw DomainError(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
clb_status solve(const clb_ph* ph, clb_solution** out, F&& f) {
  return guard([&] {
    require(ph, "ph");
    require(out, "out");
    *out = nullptr;
    *out = new clb_solution{f(ph->ph), ph->ph};
  });
}

template <typename F>
clb_status read(const clb_solution* sol, F&& f) {
  return guard([&] {
    require(sol, "solution");
    f(*sol);
  });
}

Json solution_json(const clb_solution& sol, bool with_states) {
  return std::visit([&](const auto& s) { return to_json(s, with_states); }, sol.s);
}

}  // namespace

extern "C" {

const char* clb_last_error(void) { return g_error.c_str(); }

const char* clb_version(void) { return "1.0.0"; }

const char* clb_status_name(clb_status status) {
  switch (status) {
    case CLB_OK:
      return "ok";
    case CLB_INVALID_ARGUMENT:
      return "invalid argument";
    case CLB_SOLVER_ERROR:
      return "solver error";
    case CLB_PARSE_ERROR:
      return "parse error";
    case CLB_IO_ERROR:
      return "io error";
    case CLB_INTERNAL_ERROR:
      return "internal error";
  }
  return "unknown status";
}

void clb_string_free(char* s) { std::free(s); }

clb_status clb_ph_parse(const char* spec, clb_ph** out) {
  return guard([&] {
    require(spec, "spec");
    require(out, "out");
    *out = nullptr;
    *out = new clb_ph{parse_ph_spec(spec)};
  });
}

clb_status clb_ph_create(const double* alpha, const double* S, int n, const char* label, clb_ph** out) {
  return guard([&] {
    require(alpha, "alpha");
    require(S, "S");
    require(out, "out");
    *out = nullptr;
    if (n < 1) throw DomainError("ph: n must be positive");
    RowVector a(n);
    Matrix s(n, n);
    for (int i = 0; i < n; ++i) {
      a(i) = alpha[i];
      for (int k = 0; k < n; ++k) s(i, k) = S[i * n + k];
    }
    *out = new clb_ph{PhaseType(a, s, label ? label : "ph")};
  });
}

void clb_ph_free(clb_ph* ph) { delete ph; }

clb_status clb_ph_phases(const clb_ph* ph, int* out) {
  return guard([&] {
    require(ph, "ph");
    require(out, "out");
    *out = ph->ph.phases();
  });
}

clb_status clb_ph_mean(const clb_ph* ph, double* out) {
  return guard([&] {
    require(ph, "ph");
    require(out, "out");
    *out = ph->ph.mean();
  });
}

clb_status clb_ph_scv(const clb_ph* ph, double* out) {
  return guard([&] {
    require(ph, "ph");
    require(out, "out");
    *out = ph->ph.scv();
  });
}

clb_status clb_ph_timer_y(const clb_ph* ph, double delta, double* out) {
  return guard([&] {
    require(ph, "ph");
    require(out, "out");
    *out = timer_stats(ph->ph, delta).y;
  });
}

clb_status clb_ph_to_json(const clb_ph* ph, char** out) {
  return guard([&] {
    require(ph, "ph");
    require(out, "out");
    *out = dup_string(ph_to_json(ph->ph).dump());
  });
}

clb_status clb_solve_push(const clb_ph* ph, double lambda, double delta, clb_solution** out) {
  return solve(ph, out, [&](const PhaseType& p) { return push_solve({lambda, delta}, p); });
}

clb_status clb_solve_pull(const clb_ph* ph, double lambda, double delta0, double delta1, clb_solution** out) {
  return solve(ph, out, [&](const PhaseType& p) { return pull_solve({lambda, delta0, delta1}, p); });
}

clb_status clb_solve_waterfill(const clb_ph* ph, double lambda, double delta, clb_solution** out) {
  return solve(ph, out, [&](const PhaseType& p) { return wf_solve({lambda, delta}, p); });
}

clb_status clb_solve_pooling(const clb_ph* ph, double lambda, double p, clb_solution** out) {
  return solve(ph, out, [&](const PhaseType& x) { return pooling_solve({lambda, p}, x); });
}

clb_status clb_pull_delta0(double lambda, double delta, double delta1, double* out) {
  return guard([&] {
    require(out, "out");
    *out = PullParams::from_overall(lambda, delta, delta1).delta0;
  });
}

void clb_solution_free(clb_solution* sol) { delete sol; }

clb_status clb_solution_policy(const clb_solution* sol, clb_policy* out) {
  return read(sol, [&](const clb_solution& s) {
    require(out, "out");
    *out = static_cast<clb_policy>(s.s.index());
  });
}

clb_status clb_solution_mean_response(const clb_solution* sol, double* out) {
  return read(sol, [&](const clb_solution& s) {
    require(out, "out");
    *out = std::visit([](const auto& x) { return x.mean_response; }, s.s);
  });
}

clb_status clb_solution_mean_queue(const clb_solution* sol, double* out) {
  return read(sol, [&](const clb_solution& s) {
    require(out, "out");
    *out = std::visit([](const auto& x) { return x.mean_queue; }, s.s);
  });
}

clb_status clb_solution_m_tilde(const clb_solution* sol, double* out) {
  return read(sol, [&](const clb_solution& s) {
    require(out, "out");
    if (const auto* p = std::get_if<PoolingSolution>(&s.s))
      *out = p->m;
    else
      *out = std::visit(
          [](const auto& x) -> double {
            if constexpr (requires { x.m_tilde; }) return x.m_tilde;
            return 0.0;
          },
          s.s);
  });
}

clb_status clb_solution_max_queue(const clb_solution* sol, int* out) {
  return read(sol, [&](const clb_solution& s) {
    require(out, "out");
    *out = std::visit([](const auto& x) { return x.max_queue; }, s.s);
  });
}

clb_status clb_solution_rate(const clb_solution* sol, double* out) {
  return read(sol, [&](const clb_solution& s) {
    require(out, "out");
    struct V {
      double operator()(const PushSolution& x) const { return x.nu; }
      double operator()(const PullSolution& x) const { return x.nu; }
      double operator()(const WaterfillSolution& x) const { return x.c; }
      double operator()(const PoolingSolution& x) const { return x.omega; }
    };
    *out = std::visit(V{}, s.s);
  });
}

clb_status clb_solution_bounds(const clb_solution* sol, double* lower, double* upper) {
  return read(sol, [&](const clb_solution& s) {
    require(lower, "lower");
    require(upper, "upper");
    struct V {
      MeanQueueBounds operator()(const PushSolution& x) const { return x.bounds; }
      MeanQueueBounds operator()(const PullSolution& x) const { return x.bounds; }
      MeanQueueBounds operator()(const WaterfillSolution& x) const { return x.bounds; }
      MeanQueueBounds operator()(const PoolingSolution&) const {
        throw DomainError("pooling solutions carry no mean-queue bounds");
      }
    };
    const MeanQueueBounds b = std::visit(V{}, s.s);
    *lower = b.lower;
    *upper = b.upper;
  });
}

clb_status clb_solution_q_marginal(const clb_solution* sol, double* buf, size_t cap, size_t* size) {
  return read(sol, [&](const clb_solution& s) {
    require(size, "size");
    if (cap > 0) require(buf, "buf");
    const std::vector<double>& q = std::visit([](const auto& x) -> const std::vector<double>& { return x.q_marginal; }, s.s);
    *size = q.size();
    for (size_t i = 0; i < cap && i < q.size(); ++i) buf[i] = q[i];
  });
}

clb_status clb_solution_residual(const clb_solution* sol, double* out) {
  return read(sol, [&](const clb_solution& s) {
    require(out, "out");
    struct V {
      const PhaseType& ph;
      double operator()(const PushSolution& x) const { return push_rate_residual(x); }
      double operator()(const PullSolution& x) const { return pull_rate_residual(x, ph); }
      double operator()(const WaterfillSolution& x) const {
        return std::abs(x.q_marginal[0] - (1.0 - x.params.lambda));
      }
      double operator()(const PoolingSolution& x) const { return pooling_token_residual(x); }
    };
    *out = std::visit(V{s.ph}, s.s);
  });
}

clb_status clb_solution_to_json(const clb_solution* sol, int with_states, char** out) {
  return read(sol, [&](const clb_solution& s) {
    require(out, "out");
    Json j = solution_json(s, with_states != 0);
    j["ph"] = ph_to_json(s.ph);
    *out = dup_string(j.dump());
  });
}

clb_status clb_simulate_json(const char* config_json, char** report_json) {
  return guard([&] {
    require(config_json, "config_json");
    require(report_json, "report_json");
    *report_json = nullptr;
    Json cfg;
    try {
      cfg = Json::parse(config_json);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("simulation config: ") + e.what());
    }
    const SimConfig c = sim_config_from_json(cfg);
    Json rep = to_json(simulate(c));
    rep["ph"] = c.ph.label();
    rep["seed"] = c.seed;
    *report_json = dup_string(rep.dump());
  });
}

clb_status clb_aggregate(const double* values, size_t n, double* mean, double* halfwidth) {
  return guard([&] {
    require(mean, "mean");
    require(halfwidth, "halfwidth");
    if (n > 0) require(values, "values");
    const Aggregate a = aggregate(std::vector<double>(values, values + n));
    *mean = a.mean;
    *halfwidth = a.ci_halfwidth;
  });
}

clb_status clb_table_rows_json(int n, char** out) {
  return guard([&] {
    require(out, "out");
    Json rows = Json::array();
    std::map<int, double> cavity;
    for (const TableRow& r : table_rows(n)) {
      if (!cavity.count(r.setting)) cavity[r.setting] = cavity_mean_response(r.params(), r.ph);
      Json j = {{"table", r.table},
                {"policy", to_string(r.policy)},
                {"setting", r.setting},
                {"distribution", r.ph.label()},
                {"ph", r.ph_spec},
                {"lambda", r.lambda},
                {"N", r.N},
                {"published_sim", r.sim},
                {"published_conf", r.conf},
                {"published_limit", r.limit},
                {"published_rel_err_pct", r.rel_err_pct},
                {"cavity", cavity[r.setting]}};
      if (r.policy == Policy::Pooling) {
        j["p"] = r.rate;
      } else {
        j["delta"] = r.rate;
      }
      if (r.policy == Policy::Pull) j["delta1"] = 0.0;
      if (r.policy == Policy::Waterfill) {
        j["C"] = r.C;
        const WaterfillGeometry g = waterfill_geometry(r.lambda, r.rate, r.C, r.N);
        j["M"] = g.M;
        j["d"] = g.d;
      }
      rows.push_back(j);
    }
    *out = dup_string(rows.dump());
  });
}

}  // extern "C"
