// Minimal library usage: optimize a custom objective over a mixed space.

#include <cstdio>

#include "paddy/paddy.hpp"

int main() {
  using namespace paddy;

  // Two continuous coordinates on [-5, 5] and one integer knob on [0, 10].
  SpaceSpec space{{
      {"x", ParamKind::Continuous, -5.0, 5.0, -5.0, 5.0, 0.1, false},
      {"y", ParamKind::Continuous, -5.0, 5.0, -5.0, 5.0, 0.1, false},
      {"k", ParamKind::Integer, 0.0, 10.0, 0.0, 10.0, 1.0, true},
  }};

  // The engine maximizes, so a loss is wrapped with a sign flip.
  Objective objective{
      [](const ParamVector& p) {
        const double dx = p[0] - 1.0;
        const double dy = p[1] + 2.0;
        const double dk = p[2] - 7.0;
        return -(dx * dx + dy * dy + 0.1 * dk * dk);
      },
      3, "negated quadratic bowl with minimum at (1, -2, 7)"};

  RunnerConfig config;
  config.random_seed_count = 20;
  config.threshold = 10;
  config.s_max = 10;
  config.radius = 0.5;
  config.iterations = 12;
  config.mode = Mode::Generational;
  config.gaussian = GaussianKind::Default;
  config.rng_seed = 42;

  const RunResult result = run(space, objective, config, [](const IterationReport& r) {
    std::printf("iteration %d: best %.6f (%d new plants)\n", r.iteration, r.best_fitness,
                r.new_plant_count);
  });

  std::printf("best after %zu evaluations: f(%.4f, %.4f, %.0f) = %.6f\n",
              result.state.population.size(), result.best.seed.params[0],
              result.best.seed.params[1], result.best.seed.params[2], result.best.fitness);
  return 0;
}
