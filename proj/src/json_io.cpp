#include "json_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "error.hpp"

namespace cavitylb {

namespace {

double parse_real(const std::string& s, const std::string& spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ParseError("ph spec '" + spec + "': '" + s + "' is not a number");
  return v;
}

int parse_int(const std::string& s, const std::string& spec) {
  const double v = parse_real(s, spec);
  if (v != static_cast<double>(static_cast<int>(v)))
    throw ParseError("ph spec '" + spec + "': '" + s + "' is not an integer");
  return static_cast<int>(v);
}

std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

Json bounds_json(const MeanQueueBounds& b) { return {{"lower", b.lower}, {"upper", b.upper}}; }

void add_states(Json& j, const StationaryDist& dist, bool with_states) {
  if (with_states) j["stationary"] = stationary_to_json(dist);
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

PhaseType parse_ph_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "file") {
    if (rest.empty()) throw ParseError("ph spec 'file:' needs a path");
    return ph_from_json(read_json_file(rest));
  }
  const std::vector<std::string> args = colon == std::string::npos ? std::vector<std::string>{} : split_args(rest);
  auto need = [&](std::size_t n, const char* form) {
    if (args.size() != n) throw ParseError("ph spec '" + spec + "': expected " + form);
  };
  if (kind == "exponential") {
    need(0, "exponential");
    return make_exponential();
  }
  if (kind == "erlang") {
    need(1, "erlang:k");
    return make_erlang(parse_int(args[0], spec));
  }
  if (kind == "hyperexp") {
    need(2, "hyperexp:scv,f");
    return make_hyperexp(parse_real(args[0], spec), parse_real(args[1], spec));
  }
  if (kind == "hypererlang") {
    need(3, "hypererlang:k,l,p");
    return make_hyper_erlang(parse_int(args[0], spec), parse_int(args[1], spec), parse_real(args[2], spec));
  }
  if (kind == "zeps") {
    need(1, "zeps:eps");
    return make_z_epsilon(parse_real(args[0], spec));
  }
  throw ParseError("ph spec '" + spec +
                   "': unknown kind (exponential, erlang, hyperexp, hypererlang, zeps, file)");
}

PhaseType ph_from_json(const Json& j) {
  try {
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    const auto rows = j.at("S").get<std::vector<std::vector<double>>>();
    const int n = static_cast<int>(alpha.size());
    if (n == 0) throw ParseError("ph json: alpha is empty");
    if (static_cast<int>(rows.size()) != n) throw ParseError("ph json: S must be square with the size of alpha");
    RowVector a(n);
    Matrix s(n, n);
    for (int i = 0; i < n; ++i) {
      a(i) = alpha[i];
      if (static_cast<int>(rows[i].size()) != n)
        throw ParseError("ph json: S must be square with the size of alpha");
      for (int k = 0; k < n; ++k) s(i, k) = rows[i][k];
    }
    return PhaseType(a, s, get_or<std::string>(j, "label", "ph"));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("ph json: ") + e.what());
  }
}

Json ph_to_json(const PhaseType& ph) {
  const int n = ph.phases();
  Json alpha = Json::array();
  Json s = Json::array();
  for (int i = 0; i < n; ++i) {
    alpha.push_back(ph.alpha()(i));
    Json row = Json::array();
    for (int k = 0; k < n; ++k) row.push_back(ph.S()(i, k));
    s.push_back(row);
  }
  return {{"label", ph.label()}, {"alpha", alpha}, {"S", s}, {"mean", ph.mean()}, {"scv", ph.scv()}};
}

Json stationary_to_json(const StationaryDist& dist) {
  Json out = Json::array();
  for (int i = 0; i < static_cast<int>(dist.labels.size()); ++i)
    out.push_back({{"state", to_string(dist.labels[i])}, {"p", dist.pi(i)}});
  return out;
}

Json params_to_json(const PolicyParams& params) {
  struct Visitor {
    Json operator()(const PushParams& p) const {
      return {{"policy", "push"}, {"lambda", p.lambda}, {"delta", p.delta}};
    }
    Json operator()(const PullParams& p) const {
      return {{"policy", "pull"}, {"lambda", p.lambda}, {"delta0", p.delta0}, {"delta1", p.delta1}, {"delta", p.delta()}};
    }
    Json operator()(const WaterfillParams& p) const {
      return {{"policy", "waterfill"}, {"lambda", p.lambda}, {"delta", p.delta}};
    }
    Json operator()(const PoolingParams& p) const {
      return {{"policy", "pooling"}, {"lambda", p.lambda}, {"p", p.p}};
    }
  };
  return std::visit(Visitor{}, params);
}

Json to_json(const PushSolution& s, bool with_states) {
  Json j = params_to_json(s.params);
  j["y"] = s.y;
  j["m_tilde"] = s.m_tilde;
  j["m"] = s.m;
  j["max_queue"] = s.max_queue;
  j["nu"] = s.nu;
  j["q_marginal"] = s.q_marginal;
  j["e_marginal"] = s.e_marginal;
  j["mean_queue"] = s.mean_queue;
  j["mean_response"] = s.mean_response;
  j["bounds"] = bounds_json(s.bounds);
  j["rate_residual"] = push_rate_residual(s);
  add_states(j, s.dist, with_states);
  return j;
}

Json to_json(const PullSolution& s, bool with_states) {
  Json j = params_to_json(s.params);
  j["m_tilde"] = s.m_tilde;
  j["m"] = s.m;
  j["max_queue"] = s.max_queue;
  j["nu"] = s.nu;
  j["q_marginal"] = s.q_marginal;
  j["e_marginal"] = s.e_marginal;
  j["mean_queue"] = s.mean_queue;
  j["mean_response"] = s.mean_response;
  j["bounds"] = bounds_json(s.bounds);
  add_states(j, s.dist, with_states);
  return j;
}

Json to_json(const WaterfillSolution& s, bool with_states) {
  Json j = params_to_json(s.params);
  j["y"] = s.y;
  j["m_tilde"] = s.m_tilde;
  j["m"] = s.m;
  j["max_queue"] = s.max_queue;
  j["c"] = s.c;
  j["c_formula"] = s.c_formula;
  j["q_marginal"] = s.q_marginal;
  j["mean_queue"] = s.mean_queue;
  j["mean_response"] = s.mean_response;
  j["bounds"] = bounds_json(s.bounds);
  add_states(j, s.dist, with_states);
  return j;
}

Json to_json(const PoolingSolution& s, bool with_states) {
  Json j = params_to_json(s.params);
  j["regime"] = to_string(s.regime);
  j["m"] = s.m;
  j["max_queue"] = s.max_queue;
  j["omega"] = s.omega;
  j["q_marginal"] = s.q_marginal;
  j["mean_queue"] = s.mean_queue;
  j["mean_response"] = s.mean_response;
  j["token_residual"] = pooling_token_residual(s);
  add_states(j, s.dist, with_states);
  return j;
}

SimConfig sim_config_from_json(const Json& j) {
  try {
    SimConfig c;
    const Policy policy = policy_from_string(j.at("policy").get<std::string>());
    const double lambda = j.at("lambda").get<double>();
    switch (policy) {
      case Policy::Push:
        c.params = PushParams{lambda, j.at("delta").get<double>()};
        break;
      case Policy::Waterfill:
        c.params = WaterfillParams{lambda, j.at("delta").get<double>()};
        break;
      case Policy::Pull: {
        const double d1 = get_or<double>(j, "delta1", 0.0);
        if (j.contains("delta0"))
          c.params = PullParams{lambda, j.at("delta0").get<double>(), d1};
        else
          c.params = PullParams::from_overall(lambda, j.at("delta").get<double>(), d1);
        break;
      }
      case Policy::Pooling:
        c.params = PoolingParams{lambda, j.at("p").get<double>()};
        break;
    }
    if (j.contains("ph")) {
      const Json& ph = j.at("ph");
      c.ph = ph.is_string() ? parse_ph_spec(ph.get<std::string>()) : ph_from_json(ph);
    }
    c.N = get_or<int>(j, "N", c.N);
    c.arrivals_total = get_or<std::int64_t>(j, "arrivals_total", c.arrivals_total);
    c.warmup_fraction = get_or<double>(j, "warmup_fraction", c.warmup_fraction);
    c.runs = get_or<int>(j, "runs", c.runs);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.waterfill_C = get_or<double>(j, "C", c.waterfill_C);
    c.threads = get_or<int>(j, "threads", c.threads);
    c.check_invariants = get_or<bool>(j, "check_invariants", c.check_invariants);
    c.trace_path = get_or<std::string>(j, "trace_path", c.trace_path);
    return c;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("simulation config: ") + e.what());
  }
}

Json to_json(const SimReport& r) {
  Json runs = Json::array();
  for (const RunResult& x : r.per_run)
    runs.push_back({{"mean_response", x.mean_response},
                    {"jobs_observed", x.jobs_observed},
                    {"arrived", x.arrived},
                    {"completed", x.completed},
                    {"in_system", x.in_system},
                    {"idle_fraction", x.idle_fraction},
                    {"end_time", x.end_time}});
  Json j = {{"policy", to_string(r.policy)},
            {"N", r.N},
            {"runs", r.runs},
            {"arrivals_total", r.arrivals_total},
            {"mean_response", r.mean_response},
            {"ci_halfwidth", r.ci_halfwidth},
            {"per_run_means", r.per_run_means},
            {"jobs_observed", r.jobs_observed},
            {"idle_fraction", r.idle_fraction},
            {"cavity_prediction", r.cavity_prediction},
            {"relative_error_pct", r.relative_error_pct},
            {"per_run", runs}};
  if (r.runs < 2) j["ci_halfwidth"] = nullptr;
  if (r.policy == Policy::Waterfill) {
    j["M"] = r.M;
    j["d"] = r.d;
  }
  return j;
}

}  // namespace cavitylb
