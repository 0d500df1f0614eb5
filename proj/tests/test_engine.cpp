#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "paddy/bench.hpp"
#include "paddy/engine.hpp"
#include "paddy/objectives.hpp"
#include "test_helpers.hpp"

using namespace paddy;

namespace {

RunnerState state_with_fitnesses(const std::vector<double>& fitnesses, Mode mode, int threshold,
                                 int iteration = 0) {
  RunnerState state;
  state.config.random_seed_count = static_cast<int>(fitnesses.size());
  state.config.threshold = threshold;
  state.config.s_max = 10;
  state.config.radius = 0.1;
  state.config.iterations = 100;
  state.config.mode = mode;
  state.iteration = iteration;
  for (std::size_t i = 0; i < fitnesses.size(); ++i)
    state.population.push_back(
        testutil::plant_at(static_cast<std::int64_t>(i), {0.0}, fitnesses[i], iteration));
  state.space = testutil::line_space();
  return state;
}

Objective constant_objective(int dimension, double value) {
  return {[value](const ParamVector&) { return value; }, dimension, "constant"};
}

// Mixed space exercising limits, integer rounding, and normalization at once.
SpaceSpec mixed_space() {
  ParamSpec knob;
  knob.name = "knob";
  knob.kind = ParamKind::Integer;
  knob.lower_limit = 0.0;
  knob.upper_limit = 10.0;
  knob.init_lo = 0.0;
  knob.init_hi = 10.0;
  knob.resolution = 1.0;
  knob.normalize = true;

  ParamSpec level;
  level.name = "level";
  level.lower_limit = -2.0;
  level.upper_limit = 2.0;
  level.init_lo = -1.0;
  level.init_hi = 1.0;
  level.resolution = 0.1;

  ParamSpec drift = testutil::unbounded("drift", 0.0, 1.0, 0.01);
  return {{knob, level, drift}};
}

Objective mixed_objective() {
  return {[](const ParamVector& p) {
            const double a = p[0] - 3.0;
            const double b = p[1] - 0.5;
            const double c = p[2] - 0.25;
            return -(a * a + b * b + c * c);
          },
          3, "smooth bowl over the mixed space"};
}

}  // namespace

TEST_CASE("seed quota follows the fitness fraction", "[engine]") {
  CHECK(seed_count(3.0, 1.0, 3.0, 10) == 10);
  CHECK(seed_count(1.0, 1.0, 3.0, 10) == 0);
  CHECK(seed_count(2.0, 1.0, 3.0, 25) == 13);  // round(12.5) half away from zero
  CHECK_THROWS_AS(seed_count(2.0, 1.0, 1.0, 10), std::logic_error);
  CHECK_THROWS_AS(seed_count(0.5, 1.0, 3.0, 10), std::logic_error);
}

TEST_CASE("neighbor counting at a fixed radius", "[engine]") {
  const SpaceSpec line = testutil::line_space();
  CHECK(count_neighbors({testutil::plant_at(0, {0.3}, 1.0)}, line, 0.05) ==
        std::vector<int>{0});
  CHECK(count_neighbors({testutil::plant_at(0, {0.3}, 1.0), testutil::plant_at(1, {0.3}, 2.0)},
                        line, 0.05) == std::vector<int>{1, 1});
  const std::vector<Plant> spread = {testutil::plant_at(0, {0.00}, 1.0),
                                     testutil::plant_at(1, {0.01}, 2.0),
                                     testutil::plant_at(2, {0.50}, 3.0)};
  CHECK(count_neighbors(spread, line, 0.02) == std::vector<int>{1, 1, 0});
}

TEST_CASE("neighbor counts match a brute-force oracle", "[engine]") {
  Rng rng(29);
  SpaceSpec plane{{testutil::unbounded("x"), testutil::unbounded("y")}};
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<Plant> plants;
    for (std::size_t i = 0; i < n; ++i)
      plants.push_back(testutil::plant_at(static_cast<std::int64_t>(i),
                                          {rng.uniform01(), rng.uniform01()}, rng.uniform01()));
    const double radius = 0.02 + 0.2 * rng.uniform01();
    const auto counts = count_neighbors(plants, plane, radius);

    for (std::size_t j = 0; j < n; ++j) {
      int expected = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j) continue;
        const double dx = plants[j].seed.params[0] - plants[k].seed.params[0];
        const double dy = plants[j].seed.params[1] - plants[k].seed.params[1];
        if (std::hypot(dx, dy) - radius < 0.0) ++expected;
      }
      REQUIRE(counts[j] == expected);
    }
  }
}

TEST_CASE("neighbor relation is symmetric", "[engine]") {
  Rng rng(31);
  SpaceSpec plane{{testutil::unbounded("x"), testutil::unbounded("y")}};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(20);
    std::vector<Plant> plants;
    for (std::size_t i = 0; i < n; ++i)
      plants.push_back(testutil::plant_at(static_cast<std::int64_t>(i),
                                          {rng.uniform01(), rng.uniform01()}, 0.0));
    const double radius = 0.05 + 0.3 * rng.uniform01();
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (j == k) continue;
        const double d = distance(plane, plants[j].seed.params, plants[k].seed.params);
        const bool jk = d - radius < 0.0;
        const bool kj =
            distance(plane, plants[k].seed.params, plants[j].seed.params) - radius < 0.0;
        REQUIRE(jk == kj);
      }
    }
  }
}

TEST_CASE("adaptive radius falls back to the distance quantile", "[engine]") {
  const SpaceSpec line = testutil::line_space();

  SECTION("two distant plants adopt their own separation as the radius") {
    const std::vector<Plant> far = {testutil::plant_at(0, {0.0}, 1.0),
                                    testutil::plant_at(1, {10.0}, 2.0)};
    const RadiusResult r = effective_radius(far, line, 0.02);
    CHECK(r.radius_used == Approx(10.0));
    CHECK(r.neighbor_counts == std::vector<int>{1, 1});
    CHECK_FALSE(r.fallback_uniform);
  }

  SECTION("configured radius wins when it already finds neighbors") {
    const std::vector<Plant> close = {testutil::plant_at(0, {0.0}, 1.0),
                                      testutil::plant_at(1, {0.01}, 2.0),
                                      testutil::plant_at(2, {0.015}, 3.0)};
    const RadiusResult r = effective_radius(close, line, 0.02);
    CHECK(r.radius_used == 0.02);
    CHECK_FALSE(r.fallback_uniform);
  }

  SECTION("coincident plants are neighbors at any positive radius") {
    const std::vector<Plant> same = {testutil::plant_at(0, {0.4}, 1.0),
                                     testutil::plant_at(1, {0.4}, 2.0)};
    const RadiusResult r = effective_radius(same, line, 0.02);
    CHECK(r.neighbor_counts == std::vector<int>{1, 1});
    CHECK(r.radius_used == 0.02);
  }

  SECTION("a single plant short-circuits to the uniform fallback") {
    const RadiusResult r = effective_radius({testutil::plant_at(0, {0.5}, 1.0)}, line, 0.02);
    CHECK(r.fallback_uniform);
    CHECK(r.neighbor_counts == std::vector<int>{1});
  }
}

TEST_CASE("pollination factor bounds and values", "[engine]") {
  CHECK(pollination_factor(5, 5) == 1.0);
  CHECK(pollination_factor(0, 5) == Approx(0.36788).margin(5e-6));
  CHECK(pollination_factor(0, 5) == Approx(std::exp(-1.0)));
  CHECK(pollination_factor(1, 2) == Approx(std::exp(-0.5)));
  CHECK(pollination_factor(0, 0) == 1.0);
  CHECK_THROWS_AS(pollination_factor(3, 2), std::logic_error);

  Rng rng(37);
  for (int i = 0; i < 10000; ++i) {
    const int v_max = static_cast<int>(rng.below(50));
    const int v = v_max == 0 ? 0 : static_cast<int>(rng.below(v_max + 1));
    const double u = pollination_factor(v, v_max);
    REQUIRE(u >= std::exp(-1.0) - 1e-12);
    REQUIRE(u <= 1.0 + 1e-12);
  }
}

TEST_CASE("pollinated seed count rounds half away from zero", "[engine]") {
  CHECK(pollinated_seed_count(1.0, 10) == 10);
  CHECK(pollinated_seed_count(0.36788, 10) == 4);
  CHECK(pollinated_seed_count(0.5, 0) == 0);
}

TEST_CASE("scaled sigma powers", "[engine]") {
  CHECK(scaled_sigma(0.0) == 1.0);
  CHECK(scaled_sigma(0.1) == Approx(0.2));
  CHECK(scaled_sigma(1.0) == Approx(1.024e-7).epsilon(1e-9));
}

TEST_CASE("dispersion produces well-formed children", "[engine]") {
  const SpaceSpec space = mixed_space();
  Plant parent = testutil::plant_at(7, {3.0, 0.5, 0.25}, 1.0);
  Rng rng(41);

  CHECK(disperse(parent, 0, space, GaussianKind::Default, rng).empty());

  const auto children = disperse(parent, 200, space, GaussianKind::Default, rng, 4, 100);
  REQUIRE(children.size() == 200);
  for (std::size_t c = 0; c < children.size(); ++c) {
    const Seed& child = children[c];
    CHECK(child.id == 100 + static_cast<std::int64_t>(c));
    CHECK(child.parent_id == 7);
    CHECK(child.born_iteration == 4);
    CHECK(child.deltas == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(child.params[0] == std::round(child.params[0]));
    CHECK(child.params[0] >= 0.0);
    CHECK(child.params[0] <= 10.0);
    CHECK(child.params[1] >= -2.0);
    CHECK(child.params[1] <= 2.0);
  }

  const auto scaled = disperse(parent, 50, space, GaussianKind::Scaled, rng, 1, 0);
  bool any_nonzero_delta = false;
  for (const Seed& child : scaled)
    for (double d : child.deltas) any_nonzero_delta |= d != 0.0;
  CHECK(any_nonzero_delta);
}

TEST_CASE("default dispersion matches its stated normal law", "[engine][statistics]") {
  SpaceSpec space{{testutil::unbounded("x", 0.0, 1.0, 0.01)}};
  Plant parent = testutil::plant_at(0, {5.0}, 1.0);
  Rng rng(43);
  const int n = 20000;
  const auto children = disperse(parent, n, space, GaussianKind::Default, rng);
  double sum = 0.0;
  for (const Seed& child : children) sum += child.params[0];
  const double mean = sum / n;
  double acc = 0.0;
  for (const Seed& child : children) acc += (child.params[0] - mean) * (child.params[0] - mean);
  const double sd = std::sqrt(acc / (n - 1));
  CHECK(mean == Approx(5.0).margin(0.01));
  CHECK(sd == Approx(0.2).margin(0.02));
}

TEST_CASE("normalized dispersion concentrates within one sigma of the parent",
          "[engine][statistics]") {
  ParamSpec wide;
  wide.name = "w";
  wide.lower_limit = 0.0;
  wide.upper_limit = 1000.0;
  wide.init_lo = 0.0;
  wide.init_hi = 1000.0;
  wide.resolution = 1.0;
  wide.normalize = true;
  SpaceSpec space{{wide}};
  Plant parent = testutil::plant_at(0, {500.0}, 1.0);
  Rng rng(47);
  const int n = 20000;
  const auto children = disperse(parent, n, space, GaussianKind::Default, rng);
  double sum = 0.0;
  int within = 0;
  for (const Seed& child : children) {
    sum += child.params[0];
    if (child.params[0] >= 300.0 && child.params[0] <= 700.0) ++within;
  }
  CHECK(sum / n == Approx(500.0).margin(10.0));
  // +-1 sigma in normalized space is +-200 raw: expect the usual ~68% inside.
  CHECK(static_cast<double>(within) / n == Approx(0.6827).margin(0.03));
}

TEST_CASE("initial sowing evaluates the configured number of seeds", "[engine]") {
  const Benchmark bench = make_benchmark("bimodal");
  RunnerConfig config = bench.config;
  config.rng_seed = 99;
  const RunnerState state = init_run(bench.space, bench.objective, config);
  REQUIRE(state.population.size() == 50);
  CHECK(state.iteration == 0);
  for (const Plant& plant : state.population) {
    CHECK(plant.seed.params[0] >= 0.0);
    CHECK(plant.seed.params[0] <= 1.0);
    CHECK(plant.seed.born_iteration == 0);
    CHECK_FALSE(plant.seed.parent_id.has_value());
  }

  config.random_seed_count = 1;
  config.threshold = 1;
  const RunnerState single = init_run(bench.space, bench.objective, config);
  CHECK(single.population.size() == 1);
  CHECK(best_plant(single) == single.population.front());

  const RunnerState again = init_run(bench.space, bench.objective, config);
  CHECK(single == again);
}

TEST_CASE("evaluation errors carry the offending point and leave state alone", "[engine]") {
  const SpaceSpec line = testutil::line_space();
  Objective bad{[](const ParamVector&) { return std::nan(""); }, 1, "always NaN"};
  RunnerConfig config;
  config.random_seed_count = 3;
  config.threshold = 2;
  config.s_max = 4;
  config.radius = 0.1;
  config.iterations = 3;
  CHECK_THROWS_AS(init_run(line, bad, config), evaluation_error);

  // NaN appearing mid-run: state must stay untouched by the failing step.
  RunnerState state = state_with_fitnesses({1.0, 2.0, 3.0}, Mode::Population, 2);
  const RunnerState before = state;
  CHECK_THROWS_AS(step(state, bad), evaluation_error);
  CHECK(state == before);
}

TEST_CASE("selection keeps the top plants in ascending order", "[engine]") {
  const RunnerState state = state_with_fitnesses({1.0, 4.0, 2.0, 3.0}, Mode::Population, 2);
  const auto selected = select_plants(state);
  REQUIRE(selected.size() == 2);
  CHECK(selected[0].fitness == 3.0);
  CHECK(selected[1].fitness == 4.0);
}

TEST_CASE("selection shrinks the threshold for small pools", "[engine]") {
  std::vector<double> fitnesses(10);
  std::iota(fitnesses.begin(), fitnesses.end(), 0.0);
  const RunnerState state = state_with_fitnesses(fitnesses, Mode::Population, 20);
  CHECK(select_plants(state).size() == 8);  // round(0.75 * 10)

  const RunnerState tiny = state_with_fitnesses({1.0}, Mode::Population, 20);
  CHECK(select_plants(tiny).size() == 1);
}

TEST_CASE("selection ties prefer the lower seed id", "[engine]") {
  const RunnerState state = state_with_fitnesses({5.0, 5.0, 5.0, 1.0}, Mode::Population, 2);
  const auto selected = select_plants(state);
  REQUIRE(selected.size() == 2);
  std::vector<std::int64_t> ids = {selected[0].seed.id, selected[1].seed.id};
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<std::int64_t>{0, 1});
}

TEST_CASE("population mode keeps earlier generations selectable", "[engine]") {
  const Benchmark bench = make_benchmark("bimodal");
  RunnerConfig config = bench.config;
  config.random_seed_count = 12;
  config.threshold = 6;
  config.s_max = 6;
  config.iterations = 3;
  config.mode = Mode::Population;
  config.rng_seed = 5;

  RunnerState state = init_run(bench.space, bench.objective, config);
  step(state, bench.objective);
  step(state, bench.objective);

  const auto selected = select_plants(state);
  // Full-sort oracle over every plant ever evaluated.
  std::vector<const Plant*> oracle;
  for (const Plant& plant : state.population) oracle.push_back(&plant);
  std::sort(oracle.begin(), oracle.end(), [](const Plant* a, const Plant* b) {
    if (a->fitness != b->fitness) return a->fitness > b->fitness;
    return a->seed.id < b->seed.id;
  });
  REQUIRE(selected.size() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(selected[5 - i].seed.id == oracle[i]->seed.id);
}

TEST_CASE("a flat selected pool terminates the run as a plateau", "[engine]") {
  const SpaceSpec line = testutil::line_space();
  RunnerConfig config;
  config.random_seed_count = 5;
  config.threshold = 3;
  config.s_max = 4;
  config.radius = 0.1;
  config.iterations = 10;
  RunnerState state = init_run(line, constant_objective(1, 2.5), config);
  const auto before = state.population.size();
  const IterationReport report = step(state, constant_objective(1, 2.5));
  CHECK(state.terminated);
  CHECK(state.termination_reason == TerminationReason::FitnessPlateau);
  CHECK(report.new_plant_count == 0);
  CHECK(state.population.size() == before);
  CHECK(state.iteration == 0);
  CHECK_THROWS_AS(step(state, constant_objective(1, 2.5)), std::logic_error);
}

TEST_CASE("the default bimodal configuration stops within its budget", "[engine]") {
  const Benchmark bench = make_benchmark("bimodal");
  RunnerConfig config = bench.config;
  config.rng_seed = 1234;
  const RunResult result = run(bench.space, bench.objective, config);
  CHECK(result.state.terminated);
  CHECK(result.state.iteration <= 5);
  CHECK(result.reports.size() <= 5);
}

TEST_CASE("full runs are a pure function of their inputs", "[engine]") {
  const Benchmark bench = make_benchmark("bimodal");
  RunnerConfig config = bench.config;
  config.random_seed_count = 20;
  config.threshold = 10;
  config.s_max = 20;
  config.iterations = 4;
  config.rng_seed = 2024;
  const RunResult a = run(bench.space, bench.objective, config);
  const RunResult b = run(bench.space, bench.objective, config);
  CHECK(a.state == b.state);
  CHECK(a.best == b.best);

  // The report sink sees exactly the reports the run returns.
  std::vector<int> sink_iterations;
  const RunResult c = run(bench.space, bench.objective, config,
                          [&](const IterationReport& r) { sink_iterations.push_back(r.iteration); });
  REQUIRE(sink_iterations.size() == c.reports.size());
  for (std::size_t i = 0; i < c.reports.size(); ++i)
    CHECK(sink_iterations[i] == c.reports[i].iteration);
}

TEST_CASE("both modes share the same random initiation", "[engine]") {
  const Benchmark bench = make_benchmark("bimodal");
  RunnerConfig generational = bench.config;
  generational.rng_seed = 31415;
  RunnerConfig population = generational;
  population.mode = Mode::Population;

  const RunnerState g = init_run(bench.space, bench.objective, generational);
  const RunnerState p = init_run(bench.space, bench.objective, population);
  CHECK(g.population == p.population);
  CHECK(g.rng_state == p.rng_state);
}

TEST_CASE("iteration reports satisfy the phase-equation invariants", "[engine][property]") {
  const SpaceSpec space = mixed_space();
  const Objective objective = mixed_objective();
  Rng seeds(53);
  for (int trial = 0; trial < 40; ++trial) {
    RunnerConfig config;
    config.random_seed_count = 4 + static_cast<int>(seeds.below(12));
    config.threshold = 2 + static_cast<int>(seeds.below(8));
    config.s_max = 1 + static_cast<int>(seeds.below(8));
    config.radius = 0.05 + seeds.uniform01();
    config.iterations = 1 + static_cast<int>(seeds.below(5));
    config.mode = seeds.below(2) ? Mode::Population : Mode::Generational;
    config.gaussian = seeds.below(2) ? GaussianKind::Scaled : GaussianKind::Default;
    config.rng_seed = seeds.next_u64();

    RunnerState state = init_run(space, objective, config);
    double best_so_far = best_plant(state).fitness;
    std::int64_t evaluations = config.random_seed_count;

    while (!state.terminated) {
      const auto selected = select_plants(state);
      if (config.mode == Mode::Generational) {
        for (const Plant& plant : selected)
          REQUIRE(plant.seed.born_iteration == state.iteration);
      }
      const IterationReport report = step(state, objective);

      if (!report.seed_counts.empty()) {
        REQUIRE(report.seed_counts.front() == 0);
        REQUIRE(report.seed_counts.back() == config.s_max);
        for (std::size_t j = 0; j < report.seed_counts.size(); ++j) {
          REQUIRE(report.seed_counts[j] >= 0);
          REQUIRE(report.seed_counts[j] <= config.s_max);
          REQUIRE(report.pollinated_counts[j] <= report.seed_counts[j]);
          REQUIRE(report.pollinated_counts[j] >= 0);
        }
        const int total_pollinated = std::accumulate(report.pollinated_counts.begin(),
                                                     report.pollinated_counts.end(), 0);
        REQUIRE(total_pollinated == report.new_plant_count);
      }

      REQUIRE(report.best_fitness >= best_so_far);
      best_so_far = report.best_fitness;
      evaluations += report.new_plant_count;
    }

    REQUIRE(static_cast<std::int64_t>(state.population.size()) == evaluations);
    for (const Plant& plant : state.population) {
      CHECK(plant.seed.params[0] == std::round(plant.seed.params[0]));
      CHECK(plant.seed.params[0] >= 0.0);
      CHECK(plant.seed.params[0] <= 10.0);
      CHECK(plant.seed.params[1] >= -2.0);
      CHECK(plant.seed.params[1] <= 2.0);
    }
  }
}
