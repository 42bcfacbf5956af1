// cavity_lb: command-line front end over the cavitylb C API.
//   analyze   cavity solution of one policy as JSON (or a CSV summary row)
//   simulate  finite-N simulation report
//   table     published table rows with simulated and limiting columns
//   sweep     E[R], E[Q], m̃ and mean-queue bounds over a parameter grid
// Exit codes: 0 ok, 1 usage, 2 domain or solver error.

#include <cavitylb/cavitylb.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using Json = nlohmann::json;

namespace {

struct Failure {
  std::string message;
};

void check(clb_status st) {
  if (st != CLB_OK) throw Failure{std::string(clb_status_name(st)) + ": " + clb_last_error()};
}

std::string take(char* s) {
  std::string out(s);
  clb_string_free(s);
  return out;
}

struct PhHandle {
  clb_ph* p = nullptr;
  explicit PhHandle(const std::string& spec) { check(clb_ph_parse(spec.c_str(), &p)); }
  ~PhHandle() { clb_ph_free(p); }
  PhHandle(const PhHandle&) = delete;
  PhHandle& operator=(const PhHandle&) = delete;
};

struct SolHandle {
  clb_solution* s = nullptr;
  SolHandle() = default;
  ~SolHandle() { clb_solution_free(s); }
  SolHandle(const SolHandle&) = delete;
  SolHandle& operator=(const SolHandle&) = delete;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Shortest text that parses back to the same double.
std::string full(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
std::string fixed4(double v) { return fmt("%.4f", v); }

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Failure{"cannot open output file '" + path + "'"};
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// Policy parameters shared by analyze, simulate and sweep.
struct PolicyArgs {
  std::string policy = "push";
  double lambda = 0.0;
  std::optional<double> delta;
  std::optional<double> delta0;
  double delta1 = 0.0;
  std::optional<double> p;
  std::string ph = "exponential";

  void add(CLI::App* app) {
    app->add_option("--policy", policy, "push, pull, waterfill or pooling")
        ->check(CLI::IsMember({"push", "pull", "waterfill", "pooling"}));
    app->add_option("--lambda", lambda, "arrival rate per server")->required();
    app->add_option("--delta", delta, "probe rate per server (pull: overall update rate)");
    app->add_option("--delta0", delta0, "pull: update rate of an idle server");
    app->add_option("--delta1", delta1, "pull: update probability at a completion");
    app->add_option("--p", p, "pooling: capacity share of the central server");
    app->add_option("--ph", ph, "exponential | erlang:k | hyperexp:scv,f | hypererlang:k,l,p | zeps:eps | file:path");
  }

  double need(const std::optional<double>& v, const char* name) const {
    if (!v) throw CLI::RequiredError(std::string("--") + name + " (policy " + policy + ")");
    return *v;
  }

  double pull_delta0() const {
    if (delta0) return *delta0;
    double d0 = 0.0;
    check(clb_pull_delta0(lambda, need(delta, "delta"), delta1, &d0));
    return d0;
  }

  // Resolves the policy's required options before any work is done.
  void validate() const {
    if (policy == "pooling") {
      need(p, "p");
    } else if (policy == "pull") {
      if (!delta0) need(delta, "delta");
    } else {
      need(delta, "delta");
    }
  }

  void solve(const PhHandle& h, SolHandle& out) const {
    if (policy == "push") check(clb_solve_push(h.p, lambda, *delta, &out.s));
    if (policy == "waterfill") check(clb_solve_waterfill(h.p, lambda, *delta, &out.s));
    if (policy == "pull") check(clb_solve_pull(h.p, lambda, pull_delta0(), delta1, &out.s));
    if (policy == "pooling") check(clb_solve_pooling(h.p, lambda, *p, &out.s));
  }

  Json config() const {
    Json j = {{"policy", policy}, {"lambda", lambda}, {"ph", ph}};
    if (policy == "pooling") {
      j["p"] = *p;
    } else if (policy == "pull") {
      j["delta0"] = pull_delta0();
      j["delta1"] = delta1;
    } else {
      j["delta"] = *delta;
    }
    return j;
  }
};

struct Summary {
  double er = 0, eq = 0, m_tilde = 0, lo = NAN, hi = NAN;
  int max_queue = 0;
};

Summary summarize(const SolHandle& s, bool with_bounds) {
  Summary out;
  check(clb_solution_mean_response(s.s, &out.er));
  check(clb_solution_mean_queue(s.s, &out.eq));
  check(clb_solution_m_tilde(s.s, &out.m_tilde));
  check(clb_solution_max_queue(s.s, &out.max_queue));
  if (with_bounds) check(clb_solution_bounds(s.s, &out.lo, &out.hi));
  return out;
}

std::string csv_value(double v) { return std::isnan(v) ? "" : full(v); }

int cmd_analyze(const PolicyArgs& pa, bool states, const std::string& format, const std::string& output) {
  pa.validate();
  PhHandle ph(pa.ph);
  SolHandle sol;
  pa.solve(ph, sol);
  Output out(output);
  if (format == "csv") {
    const Summary s = summarize(sol, pa.policy != "pooling");
    out.os() << "policy,lambda,ER,EQ,m_tilde,max_queue,bound_lo,bound_hi\n"
             << pa.policy << ',' << full(pa.lambda) << ',' << full(s.er) << ',' << full(s.eq) << ','
             << full(s.m_tilde) << ',' << s.max_queue << ',' << csv_value(s.lo) << ',' << csv_value(s.hi) << '\n';
    return 0;
  }
  char* js = nullptr;
  check(clb_solution_to_json(sol.s, states ? 1 : 0, &js));
  Json j = Json::parse(take(js));
  j["ER"] = j["mean_response"];
  j["EQ"] = j["mean_queue"];
  out.os() << j.dump(2) << '\n';
  return 0;
}

struct SimArgs {
  int N = 100;
  long long arrivals = 0;
  double warmup = 0.10;
  int runs = 20;
  unsigned long long seed = 1;
  double C = 20.0;
  int threads = 0;
  std::string trace;

  void add(CLI::App* app) {
    app->add_option("--N", N, "number of servers")->check(CLI::PositiveNumber);
    app->add_option("--arrivals", arrivals, "arrivals per run (default N*10^4)");
    app->add_option("--warmup", warmup, "fraction of arrivals discarded as warm-up");
    app->add_option("--runs", runs, "independent runs")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--C", C, "waterfill: batch size M = round(C*log10 N)");
    app->add_option("--threads", threads, "worker threads (default CAVITY_LB_THREADS or all cores)");
    app->add_option("--trace", trace, "CSV trace (arrival, departure, server) of run 0");
  }

  void fill(Json& j) const {
    j["N"] = N;
    j["arrivals_total"] = arrivals;
    j["warmup_fraction"] = warmup;
    j["runs"] = runs;
    j["seed"] = seed;
    j["C"] = C;
    j["threads"] = threads;
    if (!trace.empty()) j["trace_path"] = trace;
  }
};

Json run_simulation(const Json& config) {
  char* rep = nullptr;
  check(clb_simulate_json(config.dump().c_str(), &rep));
  return Json::parse(take(rep));
}

int cmd_simulate(const PolicyArgs& pa, const SimArgs& sa, const std::string& format, const std::string& output) {
  pa.validate();
  Json cfg = pa.config();
  sa.fill(cfg);
  const Json rep = run_simulation(cfg);
  Output out(output);
  if (format == "csv") {
    out.os() << "policy,N,runs,mean_response,ci_halfwidth,cavity,rel_err_pct,jobs_observed\n"
             << rep["policy"].get<std::string>() << ',' << rep["N"] << ',' << rep["runs"] << ','
             << full(rep["mean_response"]) << ',' << (rep["ci_halfwidth"].is_null() ? std::string() : full(rep["ci_halfwidth"])) << ','
             << full(rep["cavity_prediction"]) << ',' << full(rep["relative_error_pct"]) << ','
             << rep["jobs_observed"] << '\n';
    return 0;
  }
  out.os() << rep.dump(2) << '\n';
  return 0;
}

// Desk scale caps each run at N·10³ arrivals and skips N = 10⁵.
constexpr long long kDeskArrivalsPerServer = 1000;
constexpr int kDeskMaxN = 10000;

int cmd_table(int n, const std::string& scale, bool limit_only, int runs, unsigned long long seed, int threads,
              const std::string& output) {
  char* js = nullptr;
  check(clb_table_rows_json(n, &js));
  const Json rows = Json::parse(take(js));
  Output out(output);
  std::ostream& os = out.os();
  const bool wf = n == 2;
  os << "distribution,lambda," << (n == 4 ? "p" : "delta") << ',' << (wf ? "C,M," : "")
     << "N,sim,conf,inf,rel_err_pct,published_sim,published_rel_err_pct\n";
  for (const Json& r : rows) {
    const int N = r["N"];
    const double rate = n == 4 ? r["p"].get<double>() : r["delta"].get<double>();
    std::string sim = "skipped", conf = "skipped", rel = "skipped";
    const bool run = !limit_only && (scale == "full" || N <= kDeskMaxN);
    if (run) {
      Json cfg = {{"policy", r["policy"]}, {"lambda", r["lambda"]}, {"ph", r["ph"]}, {"N", N},
                  {"runs", runs},          {"seed", seed},          {"threads", threads}};
      if (n == 4) {
        cfg["p"] = rate;
      } else {
        cfg["delta"] = rate;
      }
      if (n == 3) cfg["delta1"] = 0.0;
      if (wf) cfg["C"] = r["C"];
      if (scale == "desk") cfg["arrivals_total"] = static_cast<long long>(N) * kDeskArrivalsPerServer;
      const Json rep = run_simulation(cfg);
      sim = fixed4(rep["mean_response"]);
      if (!rep["ci_halfwidth"].is_null()) conf = fmt("%.2e", rep["ci_halfwidth"].get<double>());
      rel = fixed4(rep["relative_error_pct"]);
    }
    os << '"' << r["distribution"].get<std::string>() << "\"," << full(r["lambda"]) << ',' << full(rate) << ',';
    if (wf) os << full(r["C"]) << ',' << r["M"] << ',';
    os << N << ',' << sim << ',' << conf << ',' << fixed4(r["cavity"]) << ',' << rel << ','
       << fixed4(r["published_sim"]) << ',' << fixed4(r["published_rel_err_pct"]) << '\n';
    os.flush();
  }
  return 0;
}

std::vector<double> grid(const std::vector<double>& values, std::optional<double> from, std::optional<double> to,
                         int points, bool log_scale) {
  if (!values.empty()) return values;
  if (!from || !to || points < 1) throw Failure{"sweep: empty grid (give --values or --from/--to/--points)"};
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out.push_back(log_scale ? std::exp(std::log(*from) + t * (std::log(*to) - std::log(*from)))
                            : *from + t * (*to - *from));
  }
  return out;
}

int cmd_sweep(PolicyArgs pa, const std::string& x, const std::vector<double>& xs, double f,
              const std::string& output) {
  if (xs.empty()) throw Failure{"sweep: empty grid"};
  Output out(output);
  out.os() << "x,ER,EQ,m_tilde,bound_lo,bound_hi\n";
  for (double v : xs) {
    if (x == "lambda") pa.lambda = v;
    if (x == "delta") pa.delta = v;
    if (x == "delta1") pa.delta1 = v;
    if (x == "p") pa.p = v;
    if (x == "scv") pa.ph = "hyperexp:" + full(v) + "," + full(f);
    pa.validate();
    PhHandle ph(pa.ph);
    SolHandle sol;
    pa.solve(ph, sol);
    const Summary s = summarize(sol, pa.policy != "pooling");
    out.os() << full(v) << ',' << full(s.er) << ',' << full(s.eq) << ',' << full(s.m_tilde) << ',' << csv_value(s.lo)
             << ',' << csv_value(s.hi) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity analysis and simulation of load balancing policies with phase-type job sizes"};
  app.require_subcommand(1);

  std::string format = "json", output;
  auto add_io = [&](CLI::App* c) {
    c->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    c->add_option("-o,--output", output, "output file (default stdout)");
  };

  PolicyArgs pa;
  bool states = false;
  CLI::App* analyze = app.add_subcommand("analyze", "cavity solution of one policy");
  pa.add(analyze);
  add_io(analyze);
  analyze->add_flag("--states", states, "include the labelled stationary vector");

  PolicyArgs ps;
  SimArgs sa;
  CLI::App* simulate = app.add_subcommand("simulate", "finite-N simulation");
  ps.add(simulate);
  sa.add(simulate);
  add_io(simulate);

  int table_n = 1, table_runs = 20, table_threads = 0;
  unsigned long long table_seed = 20240101;
  std::string scale = "desk";
  bool limit_only = false;
  CLI::App* table = app.add_subcommand("table", "published table rows as CSV");
  table->add_option("n", table_n, "table number 1-4 (push, waterfill, pull, pooling)")
      ->required()
      ->check(CLI::Range(1, 4));
  table->add_option("--scale", scale, "desk (N <= 10^4, N*10^3 arrivals per run) or full")
      ->check(CLI::IsMember({"desk", "full"}));
  table->add_flag("--limit-only", limit_only, "skip simulation, emit the limiting column only");
  table->add_option("--runs", table_runs, "runs per row")->check(CLI::PositiveNumber);
  table->add_option("--seed", table_seed, "master seed");
  table->add_option("--threads", table_threads, "worker threads");
  table->add_option("-o,--output", output, "output file (default stdout)");

  PolicyArgs pw;
  std::string sweep_x = "lambda";
  std::vector<double> values;
  std::optional<double> from, to;
  int points = 0;
  bool log_scale = false;
  double f = 0.5;
  CLI::App* sweep = app.add_subcommand("sweep", "cavity metrics over a parameter grid (CSV)");
  pw.add(sweep);
  sweep->add_option("--x", sweep_x, "swept parameter")
      ->check(CLI::IsMember({"lambda", "delta", "delta1", "p", "scv"}));
  sweep->add_option("--values", values, "explicit grid values")->delimiter(',');
  sweep->add_option("--from", from, "grid start");
  sweep->add_option("--to", to, "grid end");
  sweep->add_option("--points", points, "number of grid points");
  sweep->add_flag("--log", log_scale, "geometric grid");
  sweep->add_option("--f", f, "scv sweeps: hyperexponential shape f");
  sweep->add_option("-o,--output", output, "output file (default stdout)");
  // the swept parameter need not be given on its own
  sweep->get_option("--lambda")->required(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (*analyze) return cmd_analyze(pa, states, format, output);
    if (*simulate) return cmd_simulate(ps, sa, format, output);
    if (*table) return cmd_table(table_n, scale, limit_only, table_runs, table_seed, table_threads, output);
    if (*sweep) return cmd_sweep(pw, sweep_x, grid(values, from, to, points, log_scale), f, output);
  } catch (const CLI::Error& e) {
    std::cerr << "error: missing or invalid option: " << e.what() << '\n';
    return 1;
  } catch (const Failure& e) {
    std::cerr << "error: " << e.message << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
