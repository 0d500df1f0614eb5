#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "paddy/errors.hpp"
#include "paddy/param_space.hpp"
#include "paddy/rng.hpp"

namespace paddy {

/// Dispersion baseline: every Gaussian draw in the default mode, and the
/// scaling-term inheritance draw in the scaled mode, uses this sigma.
inline constexpr double kDefaultSigma = 0.2;

enum class GaussianKind { Default, Scaled };
enum class Mode { Population, Generational };
enum class TerminationReason { IterationLimit, FitnessPlateau };

inline const char* to_string(GaussianKind g) {
  return g == GaussianKind::Default ? "default" : "scaled";
}

inline GaussianKind parse_gaussian_kind(const std::string& s) {
  if (s == "default") return GaussianKind::Default;
  if (s == "scaled") return GaussianKind::Scaled;
  throw config_error("unknown gaussian kind '" + s + "'");
}

inline const char* to_string(Mode m) {
  return m == Mode::Population ? "population" : "generational";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "population") return Mode::Population;
  if (s == "generational") return Mode::Generational;
  throw config_error("unknown mode '" + s + "'");
}

inline const char* to_string(TerminationReason r) {
  return r == TerminationReason::IterationLimit ? "iteration_limit" : "fitness_plateau";
}

inline TerminationReason parse_termination_reason(const std::string& s) {
  if (s == "iteration_limit") return TerminationReason::IterationLimit;
  if (s == "fitness_plateau") return TerminationReason::FitnessPlateau;
  throw config_error("unknown termination reason '" + s + "'");
}

/// An unevaluated candidate. Root seeds from random sowing have no parent
/// and all-zero scaling terms; dispersed seeds record their parent id and
/// the iteration they were born in.
struct Seed {
  std::int64_t id = 0;
  ParamVector params;
  std::vector<double> deltas;  // per-parameter scaling term, zero unless scaled Gaussian
  std::optional<std::int64_t> parent_id;
  int born_iteration = 0;

  bool operator==(const Seed&) const = default;
};

/// A seed plus its evaluated fitness. Fitness is always finite; objectives
/// returning NaN or infinity raise evaluation_error instead.
struct Plant {
  Seed seed;
  double fitness = 0.0;

  bool operator==(const Plant&) const = default;
};

/// Fitness-function contract. The engine always maximizes; wrap minimization
/// targets (such as an MSE) with a negated evaluate.
struct Objective {
  std::function<double(const ParamVector&)> evaluate;
  int dimension = 0;
  std::string description;
};

struct RunnerConfig {
  int random_seed_count = 1;  // initial sowing size
  int threshold = 1;          // number of top plants selected
  int s_max = 1;              // maximum seeds per plant
  double radius = 1.0;        // pollination neighborhood radius
  int iterations = 1;
  Mode mode = Mode::Generational;
  GaussianKind gaussian = GaussianKind::Default;
  std::uint64_t rng_seed = 0;

  bool operator==(const RunnerConfig&) const = default;
};

inline void validate(const RunnerConfig& c) {
  if (c.random_seed_count < 1) throw config_error("random_seed_count must be >= 1");
  if (c.threshold < 1) throw config_error("threshold must be >= 1");
  if (c.s_max < 1) throw config_error("s_max must be >= 1");
  if (!(c.radius > 0.0)) throw config_error("radius must be positive");
  if (c.iterations < 1) throw config_error("iterations must be >= 1");
}

/// Complete, resumable run state. Population ids are dense from zero and the
/// vector is ordered by id.
struct RunnerState {
  RunnerConfig config;
  SpaceSpec space;
  std::vector<Plant> population;
  int iteration = 0;
  Rng::State rng_state{};
  bool terminated = false;
  std::optional<TerminationReason> termination_reason;

  bool operator==(const RunnerState&) const = default;
};

/// Per-step observability record, enough to reconstruct the usual
/// best-per-iteration and mean-per-iteration curves.
struct IterationReport {
  int iteration = 0;
  std::vector<std::int64_t> selected_ids;  // ascending fitness order
  std::vector<int> seed_counts;            // s per selected plant, same order
  std::vector<int> pollinated_counts;      // S per selected plant, same order
  double radius_used = 0.0;
  bool fallback_uniform = false;
  double best_fitness = 0.0;      // best over the whole population so far
  double mean_new_fitness = 0.0;  // zero when no new plants were produced
  int new_plant_count = 0;
};

using ReportSink = std::function<void(const IterationReport&)>;

// ---------------------------------------------------------------------------
// Phase equations
// ---------------------------------------------------------------------------

/// Seed quota for a selected plant: s_max scaled by the min-max normalized
/// fitness within the selected set, rounded half away from zero. The extremes
/// are exact: the top plant gets s_max, the bottom plant gets zero.
inline int seed_count(double y_star, double y_t, double y_max, int s_max) {
  if (!(y_t < y_max))
    throw std::logic_error("seed_count: requires y_t < y_max (equal values terminate the run)");
  if (y_star < y_t || y_star > y_max)
    throw std::logic_error("seed_count: y_star outside [y_t, y_max]");
  const double fraction = (y_star - y_t) / (y_max - y_t);
  return static_cast<int>(std::llround(static_cast<double>(s_max) * fraction));
}

namespace detail {

inline std::vector<int> count_neighbors_with(const std::vector<Plant>& selected,
                                             const SpaceSpec& space, double radius,
                                             bool strict) {
  const std::size_t n = selected.size();
  std::vector<int> counts(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double d = distance(space, selected[j].seed.params, selected[k].seed.params);
      const bool neighbor = strict ? (d - radius < 0.0) : (d - radius <= 0.0);
      if (neighbor) {
        ++counts[j];
        ++counts[k];
      }
    }
  }
  return counts;
}

inline std::vector<double> pairwise_distances(const std::vector<Plant>& selected,
                                              const SpaceSpec& space) {
  const std::size_t n = selected.size();
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k)
      d.push_back(distance(space, selected[j].seed.params, selected[k].seed.params));
  return d;
}

}  // namespace detail

/// Neighbor counts at the configured radius (strict comparison; a plant is
/// never its own neighbor).
inline std::vector<int> count_neighbors(const std::vector<Plant>& selected,
                                        const SpaceSpec& space, double radius) {
  if (!(radius > 0.0)) throw config_error("count_neighbors: radius must be positive");
  return detail::count_neighbors_with(selected, space, radius, true);
}

/// Linear-interpolation quantile of a sorted sample, q in [0, 1].
inline double linear_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("linear_quantile: empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

struct RadiusResult {
  double radius_used = 0.0;
  std::vector<int> neighbor_counts;
  bool fallback_uniform = false;
};

/// Neighbor counts with the adaptive-radius fallback. If the configured
/// radius yields no neighbors anywhere, retry with the 0.75 quantile of the
/// pairwise-distance multiset, stepping the quantile down by 0.05 per retry.
/// Quantile radii use an inclusive comparison, since the radius is drawn from
/// the distances themselves. Should every quantile down to 0.05 fail, each
/// plant is assigned exactly one neighbor, which makes the pollination factor
/// 1 for the iteration. A single selected plant has no pairwise distances and
/// falls back to the uniform assignment immediately.
inline RadiusResult effective_radius(const std::vector<Plant>& selected,
                                     const SpaceSpec& space, double radius) {
  if (selected.empty()) throw std::logic_error("effective_radius: no selected plants");
  if (!(radius > 0.0)) throw config_error("effective_radius: radius must be positive");
  if (selected.size() == 1) return {radius, {1}, true};

  auto counts = detail::count_neighbors_with(selected, space, radius, true);
  if (std::any_of(counts.begin(), counts.end(), [](int v) { return v > 0; }))
    return {radius, std::move(counts), false};

  auto dists = detail::pairwise_distances(selected, space);
  std::sort(dists.begin(), dists.end());
  for (int step = 15; step >= 1; --step) {
    const double q = 0.05 * step;  // 0.75, 0.70, ..., 0.05
    const double rq = linear_quantile(dists, q);
    counts = detail::count_neighbors_with(selected, space, rq, false);
    if (std::any_of(counts.begin(), counts.end(), [](int v) { return v > 0; }))
      return {rq, std::move(counts), false};
  }
  return {radius, std::vector<int>(selected.size(), 1), true};
}

/// Pollination factor U = exp(v / v_max - 1), in [1/e, 1]. An all-isolated
/// selection (v_max = 0) cannot occur after the adaptive-radius fallback, but
/// is still defined as 1.
inline double pollination_factor(int v, int v_max) {
  if (v < 0 || v_max < 0 || v > v_max)
    throw std::logic_error("pollination_factor: requires 0 <= v <= v_max");
  if (v_max == 0) return 1.0;
  return std::exp(static_cast<double>(v) / static_cast<double>(v_max) - 1.0);
}

/// Pollinated seed count S = round(U * s), half away from zero.
inline int pollinated_seed_count(double pollination, int s) {
  if (s < 0) throw std::logic_error("pollinated_seed_count: s must be non-negative");
  return static_cast<int>(std::llround(pollination * static_cast<double>(s)));
}

/// Dispersion sigma under the scaled Gaussian: (0.2^10)^delta.
inline double scaled_sigma(double delta) { return std::pow(0.2, 10.0 * delta); }

/// One dispersed value: a Gaussian draw around the parent value, taken in
/// normalized coordinates when the parameter uses normalization, then clamped
/// and kind-rounded.
inline double sample_dispersed_value(const ParamSpec& p, double parent_value, double sigma,
                                     Rng& rng) {
  if (p.normalize) {
    const double center = normalize(p, parent_value);
    return clamp(p, denormalize(p, rng.normal(center, sigma)));
  }
  return clamp(p, rng.normal(parent_value, sigma));
}

/// Emits `count` child seeds of a parent plant. Under the scaled Gaussian
/// each child first inherits a per-parameter scaling term (a Gaussian step of
/// width 0.2 from the parent's term) and disperses with the sigma it implies;
/// under the default Gaussian the sigma is 0.2 and scaling terms stay zero.
inline std::vector<Seed> disperse(const Plant& parent, int count, const SpaceSpec& space,
                                  GaussianKind gaussian, Rng& rng, int born_iteration = 0,
                                  std::int64_t first_id = 0) {
  if (count < 0) throw std::logic_error("disperse: count must be non-negative");
  const std::size_t dim = space.params.size();
  std::vector<Seed> children;
  children.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    Seed child;
    child.id = first_id + c;
    child.parent_id = parent.seed.id;
    child.born_iteration = born_iteration;
    child.params.resize(dim);
    child.deltas.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      double sigma = kDefaultSigma;
      double delta = 0.0;
      if (gaussian == GaussianKind::Scaled) {
        delta = rng.normal(parent.seed.deltas[i], kDefaultSigma);
        sigma = scaled_sigma(delta);
      }
      child.deltas[i] = delta;
      child.params[i] = sample_dispersed_value(space.params[i], parent.seed.params[i], sigma, rng);
    }
    children.push_back(std::move(child));
  }
  return children;
}

namespace detail {

inline double evaluate_or_throw(const Objective& objective, const ParamVector& params) {
  const double fitness = objective.evaluate(params);
  if (!std::isfinite(fitness)) {
    std::string msg = "objective returned a non-finite fitness at (";
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i) msg += ", ";
      msg += std::to_string(params[i]);
    }
    msg += ")";
    throw evaluation_error(msg, params);
  }
  return fitness;
}

}  // namespace detail

/// Sows and evaluates the initial population. Deterministic in the config's
/// rng_seed.
inline RunnerState init_run(const SpaceSpec& space, const Objective& objective,
                            const RunnerConfig& config) {
  validate(space);
  validate(config);
  if (objective.dimension != static_cast<int>(space.dimension()))
    throw config_error("objective dimension does not match the space");

  RunnerState state;
  state.config = config;
  state.space = space;
  Rng rng(config.rng_seed);
  state.population.reserve(static_cast<std::size_t>(config.random_seed_count));
  for (int k = 0; k < config.random_seed_count; ++k) {
    Seed seed;
    seed.id = k;
    seed.params = random_sow(space, rng);
    seed.deltas.assign(space.dimension(), 0.0);
    seed.born_iteration = 0;
    const double fitness = detail::evaluate_or_throw(objective, seed.params);
    state.population.push_back({std::move(seed), fitness});
  }
  state.iteration = 0;
  state.rng_state = rng.state();
  return state;
}

/// Top plants of the current candidate pool, sorted ascending by fitness
/// (y_t first, y_max last). The pool is the whole population in Population
/// mode and only the previous iteration's plants in Generational mode. When
/// the pool is smaller than the configured threshold, the effective threshold
/// drops to round(0.75 * pool size), at least 1. Fitness ties prefer the
/// lower seed id.
inline std::vector<Plant> select_plants(const RunnerState& state) {
  std::vector<const Plant*> pool;
  pool.reserve(state.population.size());
  for (const Plant& plant : state.population) {
    if (state.config.mode == Mode::Population || plant.seed.born_iteration == state.iteration)
      pool.push_back(&plant);
  }
  if (pool.empty())
    throw std::logic_error("select_plants: empty candidate pool at iteration " +
                           std::to_string(state.iteration));

  std::size_t keep = static_cast<std::size_t>(state.config.threshold);
  if (pool.size() < keep) {
    keep = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(0.75 * static_cast<double>(pool.size()))));
  }

  std::sort(pool.begin(), pool.end(), [](const Plant* a, const Plant* b) {
    if (a->fitness != b->fitness) return a->fitness > b->fitness;
    return a->seed.id < b->seed.id;
  });
  pool.resize(keep);

  std::vector<Plant> selected;
  selected.reserve(keep);
  for (auto it = pool.rbegin(); it != pool.rend(); ++it) selected.push_back(**it);
  return selected;
}

/// Highest-fitness plant over the whole population, ties to the lowest id.
inline Plant best_plant(const RunnerState& state) {
  if (state.population.empty()) throw std::logic_error("best_plant: empty population");
  const Plant* best = &state.population.front();
  for (const Plant& plant : state.population)
    if (plant.fitness > best->fitness) best = &plant;
  return *best;
}

/// One full iteration: selection, seeding, pollination, dispersion, and
/// evaluation of the new seeds. Terminates the run on a fitness plateau
/// (y_t = y_max among the selected plants, or zero new seeds) or on reaching
/// the iteration budget. On an evaluation error the state is left untouched.
inline IterationReport step(RunnerState& state, const Objective& objective) {
  if (state.terminated) throw std::logic_error("step called on a terminated run");

  const std::vector<Plant> selected = select_plants(state);
  IterationReport report;
  report.selected_ids.reserve(selected.size());
  for (const Plant& plant : selected) report.selected_ids.push_back(plant.seed.id);

  const double y_t = selected.front().fitness;
  const double y_max = selected.back().fitness;
  if (y_t == y_max) {
    state.terminated = true;
    state.termination_reason = TerminationReason::FitnessPlateau;
    report.iteration = state.iteration;
    report.best_fitness = best_plant(state).fitness;
    return report;
  }

  report.seed_counts.reserve(selected.size());
  for (const Plant& plant : selected)
    report.seed_counts.push_back(seed_count(plant.fitness, y_t, y_max, state.config.s_max));

  RadiusResult radius = effective_radius(selected, state.space, state.config.radius);
  report.radius_used = radius.radius_used;
  report.fallback_uniform = radius.fallback_uniform;
  const int v_max = *std::max_element(radius.neighbor_counts.begin(),
                                      radius.neighbor_counts.end());

  report.pollinated_counts.reserve(selected.size());
  for (std::size_t j = 0; j < selected.size(); ++j) {
    const double pollination = pollination_factor(radius.neighbor_counts[j], v_max);
    report.pollinated_counts.push_back(
        pollinated_seed_count(pollination, report.seed_counts[j]));
  }

  Rng rng = Rng::from_state(state.rng_state);
  const int born = state.iteration + 1;
  std::int64_t next_id = static_cast<std::int64_t>(state.population.size());
  std::vector<Seed> new_seeds;
  for (std::size_t j = 0; j < selected.size(); ++j) {
    auto children = disperse(selected[j], report.pollinated_counts[j], state.space,
                             state.config.gaussian, rng, born, next_id);
    next_id += static_cast<std::int64_t>(children.size());
    for (auto& child : children) new_seeds.push_back(std::move(child));
  }

  std::vector<Plant> new_plants;
  new_plants.reserve(new_seeds.size());
  double fitness_sum = 0.0;
  for (auto& seed : new_seeds) {
    const double fitness = detail::evaluate_or_throw(objective, seed.params);
    fitness_sum += fitness;
    new_plants.push_back({std::move(seed), fitness});
  }

  // Commit: nothing above mutated the state, so evaluation errors leave it intact.
  report.new_plant_count = static_cast<int>(new_plants.size());
  report.mean_new_fitness =
      new_plants.empty() ? 0.0 : fitness_sum / static_cast<double>(new_plants.size());
  for (auto& plant : new_plants) state.population.push_back(std::move(plant));
  state.rng_state = rng.state();
  state.iteration += 1;
  if (state.iteration == state.config.iterations) {
    state.terminated = true;
    state.termination_reason = TerminationReason::IterationLimit;
  }
  if (report.new_plant_count == 0) {
    state.terminated = true;
    state.termination_reason = TerminationReason::FitnessPlateau;
  }
  report.iteration = state.iteration;
  report.best_fitness = best_plant(state).fitness;
  return report;
}

struct RunResult {
  RunnerState state;
  std::vector<IterationReport> reports;
  Plant best;
};

/// Full run: init_run, then step until terminated. Reports are collected and
/// also forwarded to the optional sink as they are produced. A pure function
/// of (space, objective, config).
inline RunResult run(const SpaceSpec& space, const Objective& objective,
                     const RunnerConfig& config, const ReportSink& sink = {}) {
  RunResult result;
  result.state = init_run(space, objective, config);
  while (!result.state.terminated) {
    IterationReport report = step(result.state, objective);
    if (sink) sink(report);
    result.reports.push_back(std::move(report));
  }
  result.best = best_plant(result.state);
  return result;
}

}  // namespace paddy
