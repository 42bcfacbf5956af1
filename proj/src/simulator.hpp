// Finite-N discrete-event simulation of the four dispatching policies.
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "phase_type.hpp"
#include "pooling.hpp"
#include "pull.hpp"
#include "push.hpp"
#include "waterfill.hpp"

namespace cavitylb {

enum class Policy { Push, Pull, Waterfill, Pooling };

std::string to_string(Policy p);
Policy policy_from_string(const std::string& s);

using PolicyParams = std::variant<PushParams, PullParams, WaterfillParams, PoolingParams>;

Policy policy_of(const PolicyParams& params);

struct SimConfig {
  PolicyParams params;
  PhaseType ph = make_exponential();
  int N = 100;
  std::int64_t arrivals_total = 0;  // 0 means N·10⁴
  double warmup_fraction = 0.10;
  int runs = 20;
  std::uint64_t seed = 1;
  double waterfill_C = 20.0;  // batch size M = round(C·log10 N)
  int threads = 0;            // 0: CAVITY_LB_THREADS or hardware concurrency
  bool check_invariants = false;
  std::string trace_path;     // CSV of (arrival, departure, server) for run 0

  Policy policy() const { return policy_of(params); }
  std::int64_t arrivals() const;
  void validate() const;
};

struct WaterfillGeometry {
  int M;  // tasks per batch
  int d;  // distinct servers sampled per batch
};

WaterfillGeometry waterfill_geometry(double lambda, double delta, double C, int N);

// Water filling M tasks one at a time onto servers with the given queue
// lengths (sorted ascending): the k shortest end at a common level, and the
// last `extra` < k tasks lift that many of them one higher.
struct WaterLevel {
  int k;
  std::int64_t level;
  int extra;
};

WaterLevel water_level(const std::vector<std::int64_t>& sorted_lengths, std::int64_t M);

struct RunResult {
  double mean_response = 0.0;
  std::int64_t jobs_observed = 0;
  std::int64_t arrived = 0;
  std::int64_t completed = 0;
  std::int64_t in_system = 0;
  double idle_fraction = 0.0;  // time-average share of idle servers after warmup
  double end_time = 0.0;
};

struct SimReport {
  Policy policy = Policy::Push;
  int N = 0;
  int runs = 0;
  std::int64_t arrivals_total = 0;
  int M = 0;
  int d = 0;
  double mean_response = 0.0;
  double ci_halfwidth = 0.0;
  std::vector<double> per_run_means;
  std::vector<RunResult> per_run;
  std::int64_t jobs_observed = 0;
  double idle_fraction = 0.0;
  double cavity_prediction = 0.0;
  double relative_error_pct = 0.0;
};

struct Aggregate {
  double mean;
  double ci_halfwidth;  // 95%, Student t with runs−1 degrees of freedom
};

Aggregate aggregate(const std::vector<double>& per_run_means);

// Mean response time of the large-N limit for the configured policy.
double cavity_mean_response(const PolicyParams& params, const PhaseType& ph);

// Per-run seed derived from the master seed.
std::uint64_t run_seed(std::uint64_t seed, int run);

RunResult simulate_run(const SimConfig& config, int run);

SimReport simulate(const SimConfig& config);

}  // namespace cavitylb
