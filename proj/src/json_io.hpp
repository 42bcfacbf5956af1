// Text formats: PH spec strings, PH/solution/simulation JSON.
#pragma once

#include <string>

#include <json.hpp>

#include "phase_type.hpp"
#include "pooling.hpp"
#include "pull.hpp"
#include "push.hpp"
#include "simulator.hpp"
#include "waterfill.hpp"

namespace cavitylb {

using Json = nlohmann::json;

// exponential | erlang:k | hyperexp:scv,f | hypererlang:k,l,p | zeps:eps |
// file:<path to PH JSON>. Throws ParseError, IoError or DomainError.
PhaseType parse_ph_spec(const std::string& spec);

// {"alpha": [...], "S": [[...], ...], "label": "..."}; label optional.
PhaseType ph_from_json(const Json& j);
Json ph_to_json(const PhaseType& ph);

Json to_json(const PushSolution& s, bool with_states = false);
Json to_json(const PullSolution& s, bool with_states = false);
Json to_json(const WaterfillSolution& s, bool with_states = false);
Json to_json(const PoolingSolution& s, bool with_states = false);

Json stationary_to_json(const StationaryDist& dist);

// Keys: policy, lambda, delta | delta0, delta1 | p, ph (spec string or PH
// object), N, arrivals_total, warmup_fraction, runs, seed, C, threads,
// check_invariants, trace_path. For pull, delta with delta1 fixes delta0.
SimConfig sim_config_from_json(const Json& j);
Json to_json(const SimReport& r);

Json params_to_json(const PolicyParams& params);

}  // namespace cavitylb
