#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "paddy/engine.hpp"
#include "paddy/errors.hpp"
#include "paddy/objectives.hpp"
#include "paddy/trial_store.hpp"

namespace paddy {

// ---------------------------------------------------------------------------
// Named benchmarks
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = {"bimodal", "gramacy-lee", "surrogate-mlp",
                                                 "molecule-score"};
  return names;
}

/// A named benchmark: its search space, default runner configuration, the
/// objective, and how the headline metric is displayed (fitness as-is, or
/// negated back to a positive MSE).
struct Benchmark {
  std::string name;
  SpaceSpec space;
  RunnerConfig config;
  Objective objective;
  bool report_as_mse = false;
};

inline SpaceSpec bimodal_space() {
  ParamSpec x{"x", ParamKind::Continuous, 0.0, 1.0, 0.0, 1.0, 0.01, false};
  ParamSpec y = x;
  y.name = "y";
  return {{x, y}};
}

inline SpaceSpec gramacy_lee_space() {
  SpaceSpec space;
  ParamSpec coeff{"a0", ParamKind::Continuous, -1.0, 1.0, -1.0, 1.0, 0.05, false};
  space.params.push_back(coeff);
  for (int k = 1; k <= kTrigDegree; ++k) {
    coeff.name = "a" + std::to_string(k);
    space.params.push_back(coeff);
  }
  for (int k = 1; k <= kTrigDegree; ++k) {
    coeff.name = "b" + std::to_string(k);
    space.params.push_back(coeff);
  }
  return space;
}

inline SpaceSpec surrogate_space() {
  return {{
      {"layer1", ParamKind::Integer, kSurrogateLayer1Lo, kSurrogateLayer1Hi, 300.0, 3000.0, 0.05,
       true},
      {"layer2", ParamKind::Integer, kSurrogateLayer2Lo, kSurrogateLayer2Hi, 32.0, 500.0, 0.05,
       true},
      {"dropout1", ParamKind::Continuous, 0.0, 1.0, 0.0, 0.5, 0.05, true},
      {"dropout2", ParamKind::Continuous, 0.0, 1.0, 0.0, 0.5, 0.05, true},
  }};
}

inline Benchmark make_benchmark(const std::string& name) {
  if (name == "bimodal") {
    return {name, bimodal_space(),
            {50, 50, 100, 0.02, 5, Mode::Generational, GaussianKind::Scaled, 0},
            make_bimodal_objective(), false};
  }
  if (name == "gramacy-lee") {
    return {name, gramacy_lee_space(),
            {25, 25, 25, 0.02, 10, Mode::Generational, GaussianKind::Default, 0},
            make_gramacy_lee_objective(), true};
  }
  if (name == "surrogate-mlp") {
    return {name, surrogate_space(),
            {25, 5, 10, 0.2, 7, Mode::Generational, GaussianKind::Default, 0},
            make_surrogate_objective(), false};
  }
  if (name == "molecule-score") {
    throw config_error(
        "benchmark 'molecule-score' scores precomputed feature records and has no runnable "
        "objective; use the score-molecules command instead");
  }
  throw config_error("unknown benchmark '" + name + "'");
}

// ---------------------------------------------------------------------------
// Run bookkeeping
// ---------------------------------------------------------------------------

struct BenchmarkSpec {
  std::string name;
  int runs = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path out_dir;  // empty = do not write files
  bool save_trials = false;

  // Runner-config overrides; unset fields keep the benchmark defaults.
  std::optional<int> random_seed_count;
  std::optional<int> threshold;
  std::optional<int> s_max;
  std::optional<double> radius;
  std::optional<int> iterations;
  std::optional<Mode> mode;
  std::optional<GaussianKind> gaussian;
};

inline RunnerConfig effective_config(const Benchmark& bench, const BenchmarkSpec& spec) {
  RunnerConfig c = bench.config;
  if (spec.random_seed_count) c.random_seed_count = *spec.random_seed_count;
  if (spec.threshold) c.threshold = *spec.threshold;
  if (spec.s_max) c.s_max = *spec.s_max;
  if (spec.radius) c.radius = *spec.radius;
  if (spec.iterations) c.iterations = *spec.iterations;
  if (spec.mode) c.mode = *spec.mode;
  if (spec.gaussian) c.gaussian = *spec.gaussian;
  return c;
}

struct RunRecord {
  int run_index = 0;
  std::uint64_t rng_seed = 0;
  double best_fitness = 0.0;
  std::int64_t evaluations = 0;
  double wall_time_s = 0.0;
};

/// Aggregates are on the fitness scale (higher is better); sd is the sample
/// standard deviation (n - 1 denominator), reported as 0 with sd_defined
/// false for a single run.
struct RunSummary {
  std::vector<RunRecord> rows;
  double best = 0.0;
  double worst = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  bool sd_defined = false;
};

inline RunSummary summarize(std::vector<RunRecord> rows) {
  if (rows.empty()) throw config_error("summarize: no rows");
  RunSummary s;
  s.best = -std::numeric_limits<double>::infinity();
  s.worst = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const RunRecord& r : rows) {
    s.best = std::max(s.best, r.best_fitness);
    s.worst = std::min(s.worst, r.best_fitness);
    sum += r.best_fitness;
  }
  const double n = static_cast<double>(rows.size());
  s.mean = sum / n;
  if (rows.size() > 1) {
    double acc = 0.0;
    for (const RunRecord& r : rows) {
      const double d = r.best_fitness - s.mean;
      acc += d * d;
    }
    s.sd = std::sqrt(acc / (n - 1.0));
    s.sd_defined = true;
  }
  s.rows = std::move(rows);
  return s;
}

/// One row of the per-iteration curve file. Iteration 0 is the random
/// sowing; mean_new is the mean fitness of the plants born that iteration.
struct IterationRow {
  int run_index = 0;
  int iteration = 0;
  double best_so_far = 0.0;
  double mean_new = 0.0;
};

struct BenchmarkOutput {
  RunSummary summary;
  std::vector<IterationRow> iteration_rows;
};

// ---------------------------------------------------------------------------
// CSV output (exact float round trip via shortest decimal)
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  std::array<char, 40> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

inline double display_metric(double fitness, bool as_mse) { return as_mse ? -fitness : fitness; }

}  // namespace detail

inline void write_runs_csv(const std::filesystem::path& path, const RunSummary& summary,
                           bool as_mse) {
  auto out = detail::open_csv(path);
  out << "run,rng_seed,best_fitness,best_metric,evaluations,wall_time_s\n";
  for (const RunRecord& r : summary.rows) {
    out << r.run_index << ',' << r.rng_seed << ',' << format_double(r.best_fitness) << ','
        << format_double(detail::display_metric(r.best_fitness, as_mse)) << ',' << r.evaluations
        << ',' << format_double(r.wall_time_s) << '\n';
  }
}

inline void write_iterations_csv(const std::filesystem::path& path,
                                 const std::vector<IterationRow>& rows) {
  auto out = detail::open_csv(path);
  out << "run,iteration,best_so_far,mean_new\n";
  for (const IterationRow& r : rows) {
    out << r.run_index << ',' << r.iteration << ',' << format_double(r.best_so_far) << ','
        << format_double(r.mean_new) << '\n';
  }
}

inline void write_summary_csv(const std::filesystem::path& path, const RunSummary& summary,
                              bool as_mse) {
  auto out = detail::open_csv(path);
  out << "metric,runs,best,worst,mean,sd,sd_defined\n";
  // On the MSE scale "best" stays the best run (the smallest error).
  out << (as_mse ? "mse" : "fitness") << ',' << summary.rows.size() << ','
      << format_double(detail::display_metric(summary.best, as_mse)) << ','
      << format_double(detail::display_metric(summary.worst, as_mse)) << ','
      << format_double(detail::display_metric(summary.mean, as_mse)) << ','
      << format_double(summary.sd) << ',' << (summary.sd_defined ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Benchmark execution
// ---------------------------------------------------------------------------

namespace detail {

/// Runs fn(0..n-1) on a small worker pool. Results must be written to
/// per-index slots; the first exception is rethrown after all workers join.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const unsigned workers = std::min<unsigned>(hw ? hw : 1, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct SingleRun {
  RunRecord record;
  std::vector<IterationRow> rows;
  RunnerState final_state;
};

inline SingleRun execute_run(const Benchmark& bench, const RunnerConfig& base_config,
                             std::uint64_t base_seed, int run_index) {
  RunnerConfig config = base_config;
  config.rng_seed = base_seed + static_cast<std::uint64_t>(run_index);

  const auto start = std::chrono::steady_clock::now();
  RunResult result = run(bench.space, bench.objective, config);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  SingleRun out;
  out.record = {run_index, config.rng_seed, result.best.fitness,
                static_cast<std::int64_t>(result.state.population.size()), elapsed.count()};

  // Iteration 0 is the random sowing.
  double best0 = -std::numeric_limits<double>::infinity();
  double sum0 = 0.0;
  int count0 = 0;
  for (const Plant& plant : result.state.population) {
    if (plant.seed.born_iteration != 0) continue;
    best0 = std::max(best0, plant.fitness);
    sum0 += plant.fitness;
    ++count0;
  }
  out.rows.push_back({run_index, 0, best0, sum0 / static_cast<double>(count0)});
  for (const IterationReport& report : result.reports) {
    if (report.new_plant_count == 0) continue;
    out.rows.push_back({run_index, report.iteration, report.best_fitness,
                        report.mean_new_fitness});
  }
  out.final_state = std::move(result.state);
  return out;
}

inline void write_benchmark_files(const std::filesystem::path& out_dir,
                                  const BenchmarkOutput& output, bool as_mse) {
  std::filesystem::create_directories(out_dir);
  write_runs_csv(out_dir / "runs.csv", output.summary, as_mse);
  write_iterations_csv(out_dir / "iterations.csv", output.iteration_rows);
  write_summary_csv(out_dir / "summary.csv", output.summary, as_mse);
}

}  // namespace detail

/// Executes spec.runs independent runs with seeds base, base+1, ... and
/// writes runs.csv, iterations.csv, and summary.csv when an output directory
/// is set. Repetitions execute concurrently; results are collected in run
/// order, so the output never depends on scheduling.
inline BenchmarkOutput run_benchmark(const BenchmarkSpec& spec) {
  if (spec.runs < 1) throw config_error("run count must be >= 1");
  const Benchmark bench = make_benchmark(spec.name);
  const RunnerConfig config = effective_config(bench, spec);

  std::vector<detail::SingleRun> runs(static_cast<std::size_t>(spec.runs));
  detail::parallel_for(spec.runs, [&](int k) {
    runs[static_cast<std::size_t>(k)] = detail::execute_run(bench, config, spec.base_seed, k);
  });

  BenchmarkOutput output;
  std::vector<RunRecord> records;
  records.reserve(runs.size());
  for (auto& single : runs) {
    records.push_back(single.record);
    for (const IterationRow& row : single.rows) output.iteration_rows.push_back(row);
  }
  output.summary = summarize(std::move(records));

  if (!spec.out_dir.empty()) {
    detail::write_benchmark_files(spec.out_dir, output, bench.report_as_mse);
    if (spec.save_trials) {
      for (const auto& single : runs) {
        const auto path =
            spec.out_dir / ("trial_run" + std::to_string(single.record.run_index) + ".paddy.json");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        save_trial(single.final_state, out);
      }
    }
  }
  return output;
}

/// Uniform random search over the initiation grids. Improvement events are
/// appended to `events` as (run, evaluation index, best so far, value).
inline RunRecord random_search(const Objective& objective, const SpaceSpec& space,
                               std::int64_t n_evals, std::uint64_t rng_seed, int run_index = 0,
                               std::vector<IterationRow>* events = nullptr) {
  if (n_evals < 1) throw config_error("random_search: n_evals must be >= 1");
  validate(space);
  if (objective.dimension != static_cast<int>(space.dimension()))
    throw config_error("random_search: objective dimension does not match the space");

  const auto start = std::chrono::steady_clock::now();
  Rng rng(rng_seed);
  double best = -std::numeric_limits<double>::infinity();
  for (std::int64_t e = 1; e <= n_evals; ++e) {
    const ParamVector point = random_sow(space, rng);
    const double fitness = detail::evaluate_or_throw(objective, point);
    if (fitness > best) {
      best = fitness;
      if (events) events->push_back({run_index, static_cast<int>(e), best, fitness});
    }
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {run_index, rng_seed, best, n_evals, elapsed.count()};
}

/// Repeated random-search executions with the same seeding and output layout
/// as run_benchmark.
inline BenchmarkOutput random_search_baseline(const BenchmarkSpec& spec, std::int64_t n_evals) {
  if (spec.runs < 1) throw config_error("run count must be >= 1");
  const Benchmark bench = make_benchmark(spec.name);

  std::vector<RunRecord> records(static_cast<std::size_t>(spec.runs));
  std::vector<std::vector<IterationRow>> events(static_cast<std::size_t>(spec.runs));
  detail::parallel_for(spec.runs, [&](int k) {
    records[static_cast<std::size_t>(k)] =
        random_search(bench.objective, bench.space, n_evals,
                      spec.base_seed + static_cast<std::uint64_t>(k), k,
                      &events[static_cast<std::size_t>(k)]);
  });

  BenchmarkOutput output;
  for (const auto& rows : events)
    for (const IterationRow& row : rows) output.iteration_rows.push_back(row);
  output.summary = summarize(std::move(records));
  if (!spec.out_dir.empty())
    detail::write_benchmark_files(spec.out_dir, output, bench.report_as_mse);
  return output;
}

}  // namespace paddy
