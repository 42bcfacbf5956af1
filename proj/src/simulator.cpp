#include "simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <exception>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "error.hpp"

namespace cavitylb {

std::string to_string(Policy p) {
  switch (p) {
    case Policy::Push:
      return "push";
    case Policy::Pull:
      return "pull";
    case Policy::Waterfill:
      return "waterfill";
    case Policy::Pooling:
      return "pooling";
  }
  return "?";
}

Policy policy_from_string(const std::string& s) {
  if (s == "push") return Policy::Push;
  if (s == "pull") return Policy::Pull;
  if (s == "waterfill") return Policy::Waterfill;
  if (s == "pooling") return Policy::Pooling;
  throw ParseError("unknown policy '" + s + "' (push, pull, waterfill, pooling)");
}

Policy policy_of(const PolicyParams& params) { return static_cast<Policy>(params.index()); }

namespace {

double lambda_of(const PolicyParams& params) {
  return std::visit([](const auto& p) { return p.lambda; }, params);
}

}  // namespace

std::int64_t SimConfig::arrivals() const {
  return arrivals_total > 0 ? arrivals_total : static_cast<std::int64_t>(N) * 10000;
}

WaterfillGeometry waterfill_geometry(double lambda, double delta, double C, int N) {
  if (!(C > 0.0)) throw DomainError("waterfill: C must be positive");
  if (N < 1) throw DomainError("waterfill: N must be positive");
  const int M = std::max(1, static_cast<int>(std::lround(C * std::log10(static_cast<double>(N)))));
  const int d = std::max(1, static_cast<int>(std::lround(delta / lambda * M)));
  if (d > N)
    throw DomainError("waterfill: d = " + std::to_string(d) + " sampled servers exceeds N = " +
                      std::to_string(N));
  return {M, d};
}

void SimConfig::validate() const {
  std::visit([](const auto& p) { p.validate(); }, params);
  ph.require_unit_mean();
  if (N < 1) throw DomainError("simulate: N must be positive");
  if (runs < 1) throw DomainError("simulate: runs must be positive");
  if (arrivals_total < 0) throw DomainError("simulate: arrivals_total must be nonnegative");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
    throw DomainError("simulate: warmup_fraction must lie in [0,1)");
  if (const auto* w = std::get_if<WaterfillParams>(&params))
    waterfill_geometry(w->lambda, w->delta, waterfill_C, N);
}

WaterLevel water_level(const std::vector<std::int64_t>& sorted, std::int64_t M) {
  if (sorted.empty()) throw DomainError("water_level: no servers");
  std::int64_t remaining = M;
  std::int64_t h = sorted[0];
  int k = 1;
  const int d = static_cast<int>(sorted.size());
  while (k < d && (sorted[k] - h) * k <= remaining) {
    remaining -= (sorted[k] - h) * k;
    h = sorted[k];
    ++k;
  }
  return {k, h + remaining / k, static_cast<int>(remaining % k)};
}

Aggregate aggregate(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw DomainError("aggregate: at least two runs are needed for a confidence interval");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(dist, 0.975);
  return {mean, t * sd / std::sqrt(static_cast<double>(n))};
}

double cavity_mean_response(const PolicyParams& params, const PhaseType& ph) {
  struct Visitor {
    const PhaseType& ph;
    double operator()(const PushParams& p) const { return push_solve(p, ph).mean_response; }
    double operator()(const PullParams& p) const { return pull_solve(p, ph).mean_response; }
    double operator()(const WaterfillParams& p) const { return wf_solve(p, ph).mean_response; }
    double operator()(const PoolingParams& p) const { return pooling_solve(p, ph).mean_response; }
  };
  return std::visit(Visitor{ph}, params);
}

std::uint64_t run_seed(std::uint64_t seed, int run) {
  // splitmix64 finalizer over the (seed, run) pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(run) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

using Rng = std::mt19937_64;

// Servers grouped by an integer key (queue length or dispatcher estimate),
// with uniform sampling among the servers of minimal or maximal key.
class KeyBuckets {
 public:
  explicit KeyBuckets(int n) : key_(n, 0), pos_(n) {
    buckets_.emplace_back();
    buckets_[0].reserve(n);
    for (int i = 0; i < n; ++i) {
      pos_[i] = i;
      buckets_[0].push_back(i);
    }
  }

  int key(int s) const { return key_[s]; }
  int min_key() const { return min_; }
  int max_key() const { return max_; }

  void set(int s, int k) {
    const int old = key_[s];
    if (old == k) return;
    auto& from = buckets_[old];
    const int last = from.back();
    from[pos_[s]] = last;
    pos_[last] = pos_[s];
    from.pop_back();
    if (static_cast<int>(buckets_.size()) <= k) buckets_.resize(k + 1);
    pos_[s] = static_cast<int>(buckets_[k].size());
    buckets_[k].push_back(s);
    key_[s] = k;
    if (k < min_) min_ = k;
    if (k > max_) max_ = k;
    if (from.empty()) {
      if (old == min_)
        while (buckets_[min_].empty()) ++min_;
      if (old == max_)
        while (buckets_[max_].empty()) --max_;
    }
  }

  int pick_min(Rng& rng) const { return pick(buckets_[min_], rng); }
  int pick_max(Rng& rng) const { return pick(buckets_[max_], rng); }

 private:
  static int pick(const std::vector<int>& b, Rng& rng) {
    if (b.size() == 1) return b[0];
    return b[std::uniform_int_distribution<std::size_t>(0, b.size() - 1)(rng)];
  }

  std::vector<int> key_;
  std::vector<int> pos_;
  std::vector<std::vector<int>> buckets_;
  int min_ = 0;
  int max_ = 0;
};

// Phase-by-phase sampler for a PH job: exponential holding time per phase,
// then a jump to another phase or absorption (encoded as -1). The walk runs
// to absorption when service starts, so each job costs one calendar event.
class PhaseSampler {
 public:
  PhaseSampler(const PhaseType& ph, double speed) : n_(ph.phases()) {
    rate_.resize(n_);
    jump_.assign(n_, {});
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) {
      acc += ph.alpha()(j);
      init_.push_back(acc);
    }
    for (int j = 0; j < n_; ++j) {
      const double r = -ph.S()(j, j);
      rate_[j] = r * speed;
      double c = 0.0;
      for (int k = 0; k < n_; ++k) {
        if (k == j) continue;
        const double v = ph.S()(j, k);
        if (v <= 0.0) continue;
        c += v / r;
        jump_[j].push_back({c, k});
      }
    }
  }

  int initial(Rng& rng) const {
    if (n_ == 1) return 0;
    const double u = uniform(rng) * init_.back();
    for (int j = 0; j < n_; ++j)
      if (u < init_[j]) return j;
    return n_ - 1;
  }

  double holding(int j, Rng& rng) const { return exp1(rng) / rate_[j]; }

  double service_time(Rng& rng) const {
    double t = 0.0;
    for (int j = initial(rng); j >= 0; j = next(j, rng)) t += holding(j, rng);
    return t;
  }

  int next(int j, Rng& rng) const {
    const auto& jumps = jump_[j];
    if (jumps.empty()) return -1;
    const double u = uniform(rng);
    for (const auto& [c, k] : jumps)
      if (u < c) return k;
    return -1;
  }

  static double uniform(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
  static double exp1(Rng& rng) { return std::exponential_distribution<double>(1.0)(rng); }

 private:
  int n_;
  std::vector<double> init_;
  std::vector<double> rate_;
  std::vector<std::vector<std::pair<double, int>>> jump_;
};

struct Job {
  double arrival;
  bool tagged;  // arrived inside the measurement window
};

struct CompletionEvent {
  double t;
  int server;
  std::uint32_t version;
  bool operator>(const CompletionEvent& o) const { return t > o.t; }
};

class Simulation {
 public:
  Simulation(const SimConfig& cfg, int run)
      : cfg_(cfg),
        policy_(cfg.policy()),
        N_(cfg.N),
        rng_(run_seed(cfg.seed, run)),
        sampler_(cfg.ph, policy_ == Policy::Pooling ? 1.0 - std::get<PoolingParams>(cfg.params).p : 1.0),
        queue_(N_),
        version_(N_, 0),
        lengths_(N_),
        estimates_(N_),
        idle_pos_(N_) {
    idle_.reserve(N_);
    for (int i = 0; i < N_; ++i) {
      idle_pos_[i] = i;
      idle_.push_back(i);
    }
    total_ = cfg.arrivals();
    warm_ = static_cast<std::int64_t>(std::llround(cfg.warmup_fraction * static_cast<double>(total_)));
    const double lambda = lambda_of(cfg.params);
    arrival_rate_ = lambda * N_;
    switch (policy_) {
      case Policy::Push:
        probe_rate_ = std::get<PushParams>(cfg.params).delta * N_;
        break;
      case Policy::Pull: {
        const auto& p = std::get<PullParams>(cfg.params);
        delta0_ = p.delta0;
        delta1_ = p.delta1;
        break;
      }
      case Policy::Waterfill: {
        const auto& p = std::get<WaterfillParams>(cfg.params);
        geom_ = waterfill_geometry(p.lambda, p.delta, cfg.waterfill_C, N_);
        arrival_rate_ = lambda * N_ / geom_.M;
        perm_.resize(N_);
        for (int i = 0; i < N_; ++i) perm_[i] = i;
        break;
      }
      case Policy::Pooling:
        token_rate_ = std::get<PoolingParams>(cfg.params).p * N_;
        track_lengths_ = true;
        break;
    }
    if (!cfg.trace_path.empty() && run == 0) {
      trace_.open(cfg.trace_path);
      if (!trace_) throw IoError("simulate: cannot open trace file '" + cfg.trace_path + "'");
      trace_ << "arrival,departure,server\n";
      trace_.precision(17);
    }
  }

  RunResult run() {
    RunResult r;
    if (arrival_rate_ <= 0.0) return r;
    double next_global = now_ + PhaseSampler::exp1(rng_) / global_rate();
    // After the last counted arrival the system keeps running, arrivals
    // included, until every tagged job has left; dropping the jobs still
    // present would bias the mean towards short jobs.
    while (arrived_ < total_ || tagged_in_system_ > 0) {
      const bool service_first = !events_.empty() && events_.top().t < next_global;
      const double t = service_first ? events_.top().t : next_global;
      advance(t);
      const double rate_before = global_rate();
      if (service_first) {
        const CompletionEvent ev = events_.top();
        events_.pop();
        if (ev.version == version_[ev.server]) completion(ev.server);
      } else {
        global_event();
      }
      const double rate_after = global_rate();
      // Exponential races are memoryless, so the pending global clock stays
      // valid unless its total rate changed.
      if (!service_first || rate_after != rate_before) next_global = now_ + PhaseSampler::exp1(rng_) / rate_after;
    }
    r.mean_response = observed_ > 0 ? response_sum_ / static_cast<double>(observed_) : 0.0;
    r.jobs_observed = observed_;
    r.arrived = arrived_;
    r.completed = completed_;
    std::int64_t in_system = 0;
    for (const auto& q : queue_) in_system += static_cast<std::int64_t>(q.size());
    r.in_system = in_system;
    const double span = cutoff_time_ - warm_time_;
    r.idle_fraction = span > 0.0 ? idle_area_ / span / N_ : 0.0;
    r.end_time = now_;
    return r;
  }

 private:
  double global_rate() const {
    double g = arrival_rate_ + probe_rate_ + token_rate_;
    if (policy_ == Policy::Pull) g += delta0_ * static_cast<double>(idle_.size());
    return g;
  }

  void advance(double t) {
    if (warm_done_ && arrived_ < total_) idle_area_ += static_cast<double>(idle_.size()) * (t - now_);
    now_ = t;
  }

  void set_idle(int s, bool idle) {
    if (idle) {
      idle_pos_[s] = static_cast<int>(idle_.size());
      idle_.push_back(s);
    } else {
      const int last = idle_.back();
      idle_[idle_pos_[s]] = last;
      idle_pos_[last] = idle_pos_[s];
      idle_.pop_back();
    }
  }

  void start_service(int s) {
    events_.push({now_ + sampler_.service_time(rng_), s, version_[s]});
  }

  void count_arrival() {
    ++arrived_;
    if (!warm_done_ && arrived_ > warm_) {
      warm_done_ = true;
      warm_time_ = now_;
    }
    if (arrived_ == total_) cutoff_time_ = now_;
  }

  void add_job(int s) {
    const bool tagged = warm_done_ && arrived_ <= total_;
    if (tagged) ++tagged_in_system_;
    queue_[s].push_back({now_, tagged});
    if (track_lengths_) lengths_.set(s, static_cast<int>(queue_[s].size()));
    if (queue_[s].size() == 1) {
      set_idle(s, false);
      start_service(s);
    }
  }

  void record_departure(int s, const Job& job) {
    ++completed_;
    if (job.tagged) {
      response_sum_ += now_ - job.arrival;
      ++observed_;
      --tagged_in_system_;
    }
    if (trace_.is_open()) trace_ << job.arrival << ',' << now_ << ',' << s << '\n';
  }

  void finish_front(int s) {
    record_departure(s, queue_[s].front());
    queue_[s].pop_front();
    ++version_[s];
    if (track_lengths_) lengths_.set(s, static_cast<int>(queue_[s].size()));
    if (queue_[s].empty()) {
      set_idle(s, true);
    } else {
      start_service(s);
    }
  }

  void completion(int s) {
    finish_front(s);
    if (policy_ == Policy::Pull && delta1_ > 0.0 && PhaseSampler::uniform(rng_) < delta1_)
      estimates_.set(s, static_cast<int>(queue_[s].size()));
    check(s);
  }

  void global_event() {
    const double u = PhaseSampler::uniform(rng_) * global_rate();
    if (u < arrival_rate_) {
      arrival();
      return;
    }
    switch (policy_) {
      case Policy::Push: {
        const int s = std::uniform_int_distribution<int>(0, N_ - 1)(rng_);
        estimates_.set(s, static_cast<int>(queue_[s].size()));
        check(s);
        break;
      }
      case Policy::Pull: {
        if (idle_.empty()) break;
        const int s = idle_[std::uniform_int_distribution<std::size_t>(0, idle_.size() - 1)(rng_)];
        estimates_.set(s, 0);
        break;
      }
      case Policy::Pooling:
        token();
        break;
      case Policy::Waterfill:
        break;
    }
  }

  void arrival() {
    switch (policy_) {
      case Policy::Push:
      case Policy::Pull: {
        count_arrival();
        const int s = estimates_.pick_min(rng_);
        estimates_.set(s, estimates_.key(s) + 1);
        add_job(s);
        check(s);
        break;
      }
      case Policy::Pooling: {
        count_arrival();
        const int s = std::uniform_int_distribution<int>(0, N_ - 1)(rng_);
        add_job(s);
        check(s);
        break;
      }
      case Policy::Waterfill:
        batch();
        break;
    }
  }

  void batch() {
    const int d = geom_.d;
    for (int i = 0; i < d; ++i) {
      const int j = std::uniform_int_distribution<int>(i, N_ - 1)(rng_);
      std::swap(perm_[i], perm_[j]);
    }
    // The sample order is uniformly random, so a stable sort by length keeps
    // ties in random order.
    sel_.assign(perm_.begin(), perm_.begin() + d);
    auto len = [&](int s) { return static_cast<std::int64_t>(queue_[s].size()); };
    std::stable_sort(sel_.begin(), sel_.end(), [&](int x, int y) { return len(x) < len(y); });
    std::vector<std::int64_t> lens(d);
    for (int i = 0; i < d; ++i) lens[i] = len(sel_[i]);
    const WaterLevel w = water_level(lens, geom_.M);
    const int k = w.k, r = w.extra;
    const std::int64_t h = w.level;
    for (int i = 0; i < r; ++i) {
      const int j = std::uniform_int_distribution<int>(i, k - 1)(rng_);
      std::swap(sel_[i], sel_[j]);
    }
    for (int i = 0; i < k; ++i) {
      const int s = sel_[i];
      const std::int64_t target = h + (i < r ? 1 : 0);
      while (len(s) < target) {
        count_arrival();
        add_job(s);
      }
      check(s);
    }
  }

  void token() {
    if (lengths_.max_key() == 0) return;
    const int s = lengths_.pick_max(rng_);
    auto& q = queue_[s];
    if (q.size() >= 2) {
      record_departure(s, q.back());
      q.pop_back();
      lengths_.set(s, static_cast<int>(q.size()));
    } else {
      finish_front(s);
    }
    check(s);
  }

  void check(int s) const {
    if (!cfg_.check_invariants) return;
    const bool estimated = policy_ == Policy::Push || policy_ == Policy::Pull;
    if (estimated && estimates_.key(s) < static_cast<int>(queue_[s].size()))
      throw SolverError("simulate: estimate below true queue length at server " + std::to_string(s));
    if (arrived_ != completed_ + in_system_slow())
      throw SolverError("simulate: job conservation violated");
  }

  std::int64_t in_system_slow() const {
    std::int64_t n = 0;
    for (const auto& q : queue_) n += static_cast<std::int64_t>(q.size());
    return n;
  }

  const SimConfig& cfg_;
  Policy policy_;
  int N_;
  Rng rng_;
  PhaseSampler sampler_;
  std::vector<std::deque<Job>> queue_;  // front is in service
  std::vector<std::uint32_t> version_;
  KeyBuckets lengths_;
  KeyBuckets estimates_;
  std::vector<int> idle_;
  std::vector<int> idle_pos_;
  std::priority_queue<CompletionEvent, std::vector<CompletionEvent>, std::greater<>> events_;
  std::vector<int> perm_;
  std::vector<int> sel_;
  bool track_lengths_ = false;
  WaterfillGeometry geom_{1, 1};

  double arrival_rate_ = 0.0;
  double probe_rate_ = 0.0;
  double token_rate_ = 0.0;
  double delta0_ = 0.0;
  double delta1_ = 0.0;

  double now_ = 0.0;
  std::int64_t total_ = 0;
  std::int64_t warm_ = 0;
  std::int64_t arrived_ = 0;
  std::int64_t completed_ = 0;
  std::int64_t observed_ = 0;
  std::int64_t tagged_in_system_ = 0;
  double cutoff_time_ = 0.0;
  double response_sum_ = 0.0;
  bool warm_done_ = false;
  double warm_time_ = 0.0;
  double idle_area_ = 0.0;
  std::ofstream trace_;
};

int thread_count(const SimConfig& cfg) {
  int n = cfg.threads;
  if (n <= 0) {
    if (const char* env = std::getenv("CAVITY_LB_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, cfg.runs));
}

}  // namespace

RunResult simulate_run(const SimConfig& config, int run) {
  config.validate();
  return Simulation(config, run).run();
}

SimReport simulate(const SimConfig& config) {
  config.validate();
  SimReport rep;
  rep.policy = config.policy();
  rep.N = config.N;
  rep.runs = config.runs;
  rep.arrivals_total = config.arrivals();
  if (const auto* w = std::get_if<WaterfillParams>(&config.params)) {
    const WaterfillGeometry g = waterfill_geometry(w->lambda, w->delta, config.waterfill_C, config.N);
    rep.M = g.M;
    rep.d = g.d;
  }

  rep.per_run.resize(config.runs);
  std::vector<std::exception_ptr> errors(config.runs);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < config.runs; i = next++) {
      try {
        rep.per_run[i] = Simulation(config, i).run();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nt = thread_count(config);
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  double idle = 0.0;
  for (const RunResult& r : rep.per_run) {
    rep.per_run_means.push_back(r.mean_response);
    rep.jobs_observed += r.jobs_observed;
    idle += r.idle_fraction;
  }
  rep.idle_fraction = idle / config.runs;
  if (config.runs >= 2) {
    const Aggregate a = aggregate(rep.per_run_means);
    rep.mean_response = a.mean;
    rep.ci_halfwidth = a.ci_halfwidth;
  } else {
    rep.mean_response = rep.per_run_means[0];
  }
  if (lambda_of(config.params) > 0.0) {
    rep.cavity_prediction = cavity_mean_response(config.params, config.ph);
    if (rep.cavity_prediction > 0.0)
      rep.relative_error_pct =
          100.0 * std::abs(rep.mean_response - rep.cavity_prediction) / rep.cavity_prediction;
  }
  return rep;
}

}  // namespace cavitylb
