#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "paddy/engine.hpp"
#include "paddy/param_space.hpp"

namespace paddy {

/// Trial documents are JSON, format_version 1, with doubles serialized as
/// shortest round-trip decimals. The generator algorithm name and version are
/// embedded so that resuming against a different random stream is rejected
/// rather than silently diverging. Suggested file extension: .paddy.json.
inline constexpr int kTrialFormatVersion = 1;

class trial_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input is not a well-formed document (bad JSON, truncation, empty input).
class trial_parse_error : public trial_error {
public:
  using trial_error::trial_error;
};

/// Document uses an unknown format version or random generator.
class trial_version_error : public trial_error {
public:
  using trial_error::trial_error;
};

/// Document is well-formed JSON but fields are missing or mistyped.
class trial_schema_error : public trial_error {
public:
  using trial_error::trial_error;
};

/// Document decodes to a state that violates runner invariants.
class trial_invariant_error : public trial_error {
public:
  using trial_error::trial_error;
};

/// Writing the document to the sink failed.
class trial_io_error : public trial_error {
public:
  using trial_error::trial_error;
};

namespace detail {

using nlohmann::json;

inline json space_to_json(const SpaceSpec& space) {
  json params = json::array();
  for (const ParamSpec& p : space.params) {
    json jp;
    jp["name"] = p.name;
    jp["kind"] = to_string(p.kind);
    jp["lower_limit"] = p.lower_limit ? json(*p.lower_limit) : json(nullptr);
    jp["upper_limit"] = p.upper_limit ? json(*p.upper_limit) : json(nullptr);
    jp["init_lo"] = p.init_lo;
    jp["init_hi"] = p.init_hi;
    jp["resolution"] = p.resolution;
    jp["normalize"] = p.normalize;
    params.push_back(std::move(jp));
  }
  return json{{"params", std::move(params)}};
}

inline json config_to_json(const RunnerConfig& c) {
  return json{{"random_seed_count", c.random_seed_count},
              {"threshold", c.threshold},
              {"s_max", c.s_max},
              {"radius", c.radius},
              {"iterations", c.iterations},
              {"mode", to_string(c.mode)},
              {"gaussian", to_string(c.gaussian)},
              {"rng_seed", c.rng_seed}};
}

inline const json& require(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw trial_schema_error(std::string("trial document: missing field '") + key + "' in " +
                             where);
  return *it;
}

template <typename T>
T field(const json& j, const char* key, const char* where) {
  const json& value = require(j, key, where);
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw trial_schema_error(std::string("trial document: field '") + key + "' in " + where +
                             " has the wrong type");
  }
}

inline SpaceSpec space_from_json(const json& j) {
  SpaceSpec space;
  const json& params = require(j, "params", "space");
  if (!params.is_array()) throw trial_schema_error("trial document: space.params must be an array");
  for (const json& jp : params) {
    ParamSpec p;
    p.name = field<std::string>(jp, "name", "param");
    p.kind = parse_param_kind(field<std::string>(jp, "kind", "param"));
    const json& lo = require(jp, "lower_limit", "param");
    const json& hi = require(jp, "upper_limit", "param");
    if (!lo.is_null()) p.lower_limit = lo.get<double>();
    if (!hi.is_null()) p.upper_limit = hi.get<double>();
    p.init_lo = field<double>(jp, "init_lo", "param");
    p.init_hi = field<double>(jp, "init_hi", "param");
    p.resolution = field<double>(jp, "resolution", "param");
    p.normalize = field<bool>(jp, "normalize", "param");
    space.params.push_back(std::move(p));
  }
  return space;
}

inline RunnerConfig config_from_json(const json& j) {
  RunnerConfig c;
  c.random_seed_count = field<int>(j, "random_seed_count", "config");
  c.threshold = field<int>(j, "threshold", "config");
  c.s_max = field<int>(j, "s_max", "config");
  c.radius = field<double>(j, "radius", "config");
  c.iterations = field<int>(j, "iterations", "config");
  c.mode = parse_mode(field<std::string>(j, "mode", "config"));
  c.gaussian = parse_gaussian_kind(field<std::string>(j, "gaussian", "config"));
  c.rng_seed = field<std::uint64_t>(j, "rng_seed", "config");
  return c;
}

inline void check_invariants(const RunnerState& state) {
  try {
    validate(state.space);
    validate(state.config);
  } catch (const config_error& e) {
    throw trial_invariant_error(std::string("trial document: ") + e.what());
  }
  if (state.iteration < 0 || state.iteration > state.config.iterations)
    throw trial_invariant_error("trial document: iteration outside [0, config.iterations]");
  if (!state.terminated && state.iteration >= state.config.iterations)
    throw trial_invariant_error("trial document: live run already at the iteration budget");
  if (!state.terminated && state.termination_reason)
    throw trial_invariant_error("trial document: termination reason on a live run");
  if (state.terminated && !state.termination_reason)
    throw trial_invariant_error("trial document: terminated run without a reason");
  const std::size_t dim = state.space.dimension();
  for (std::size_t i = 0; i < state.population.size(); ++i) {
    const Plant& plant = state.population[i];
    if (plant.seed.id != static_cast<std::int64_t>(i))
      throw trial_invariant_error("trial document: plant ids must be dense from 0");
    if (plant.seed.params.size() != dim || plant.seed.deltas.size() != dim)
      throw trial_invariant_error("trial document: plant vectors do not match the space");
    if (!std::isfinite(plant.fitness))
      throw trial_invariant_error("trial document: non-finite fitness");
    if (plant.seed.born_iteration < 0 || plant.seed.born_iteration > state.iteration)
      throw trial_invariant_error("trial document: born_iteration outside the run");
    if (plant.seed.parent_id) {
      if (*plant.seed.parent_id < 0 || *plant.seed.parent_id >= plant.seed.id)
        throw trial_invariant_error("trial document: parent id must precede the child");
    } else {
      for (double d : plant.seed.deltas)
        if (d != 0.0)
          throw trial_invariant_error("trial document: root seeds must have zero deltas");
    }
  }
}

}  // namespace detail

inline void save_trial(const RunnerState& state, std::ostream& out) {
  using detail::json;
  json j;
  j["format_version"] = kTrialFormatVersion;
  j["rng"] = json{{"algorithm", Rng::algorithm_name},
                  {"version", Rng::algorithm_version},
                  {"state", state.rng_state}};
  j["space"] = detail::space_to_json(state.space);
  j["config"] = detail::config_to_json(state.config);
  j["iteration"] = state.iteration;
  j["terminated"] = state.terminated;
  j["termination_reason"] =
      state.termination_reason ? json(to_string(*state.termination_reason)) : json(nullptr);
  json plants = json::array();
  for (const Plant& plant : state.population) {
    json jp;
    jp["id"] = plant.seed.id;
    jp["params"] = plant.seed.params;
    jp["deltas"] = plant.seed.deltas;
    jp["parent_id"] = plant.seed.parent_id ? json(*plant.seed.parent_id) : json(nullptr);
    jp["born_iteration"] = plant.seed.born_iteration;
    jp["fitness"] = plant.fitness;
    plants.push_back(std::move(jp));
  }
  j["plants"] = std::move(plants);
  out << j.dump(2) << '\n';
  if (!out) throw trial_io_error("trial document: write failed");
}

inline std::string save_trial_string(const RunnerState& state) {
  std::ostringstream out;
  save_trial(state, out);
  return out.str();
}

inline RunnerState load_trial(std::istream& in) {
  using detail::json;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw trial_parse_error(std::string("trial document: ") + e.what());
  }
  if (!j.is_object()) throw trial_schema_error("trial document: top level must be an object");

  const int version = detail::field<int>(j, "format_version", "document");
  if (version != kTrialFormatVersion)
    throw trial_version_error("trial document: unsupported format_version " +
                              std::to_string(version));

  const json& rng = detail::require(j, "rng", "document");
  if (detail::field<std::string>(rng, "algorithm", "rng") != Rng::algorithm_name ||
      detail::field<int>(rng, "version", "rng") != Rng::algorithm_version)
    throw trial_version_error("trial document: random generator mismatch");

  RunnerState state;
  try {
    state.rng_state = detail::field<Rng::State>(rng, "state", "rng");
    state.space = detail::space_from_json(detail::require(j, "space", "document"));
    state.config = detail::config_from_json(detail::require(j, "config", "document"));
  } catch (const json::exception& e) {
    throw trial_schema_error(std::string("trial document: ") + e.what());
  } catch (const config_error& e) {
    throw trial_schema_error(std::string("trial document: ") + e.what());
  }
  state.iteration = detail::field<int>(j, "iteration", "document");
  state.terminated = detail::field<bool>(j, "terminated", "document");
  const json& reason = detail::require(j, "termination_reason", "document");
  if (!reason.is_null()) {
    try {
      state.termination_reason = parse_termination_reason(reason.get<std::string>());
    } catch (const json::exception&) {
      throw trial_schema_error("trial document: termination_reason has the wrong type");
    } catch (const config_error& e) {
      throw trial_schema_error(std::string("trial document: ") + e.what());
    }
  }

  const json& plants = detail::require(j, "plants", "document");
  if (!plants.is_array()) throw trial_schema_error("trial document: plants must be an array");
  for (const json& jp : plants) {
    Plant plant;
    plant.seed.id = detail::field<std::int64_t>(jp, "id", "plant");
    try {
      plant.seed.params = detail::field<std::vector<double>>(jp, "params", "plant");
      plant.seed.deltas = detail::field<std::vector<double>>(jp, "deltas", "plant");
    } catch (const json::exception& e) {
      throw trial_schema_error(std::string("trial document: ") + e.what());
    }
    const json& parent = detail::require(jp, "parent_id", "plant");
    if (!parent.is_null()) {
      if (!parent.is_number_integer())
        throw trial_schema_error("trial document: parent_id has the wrong type");
      plant.seed.parent_id = parent.get<std::int64_t>();
    }
    plant.seed.born_iteration = detail::field<int>(jp, "born_iteration", "plant");
    plant.fitness = detail::field<double>(jp, "fitness", "plant");
    state.population.push_back(std::move(plant));
  }

  detail::check_invariants(state);
  return state;
}

inline RunnerState load_trial_string(const std::string& text) {
  std::istringstream in(text);
  return load_trial(in);
}

}  // namespace paddy
