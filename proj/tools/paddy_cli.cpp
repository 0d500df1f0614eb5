// Command-line harness around the paddy library: repeated benchmark runs,
// a uniform random-search baseline, trial resumption, and molecule scoring
// from precomputed feature tables. All tabular output is UTF-8 CSV with the
// headers documented in the README.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "paddy/paddy.hpp"

namespace fs = std::filesystem;

namespace {

struct RunOptions {
  std::string benchmark;
  int runs = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "paddy_out";
  std::string mode;
  std::string gaussian;
  int random_seeds = 0;
  int threshold = 0;
  int s_max = 0;
  double radius = 0.0;
  int iterations = 0;
  bool save_trials = false;
};

void add_override_flags(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("--mode", opts.mode, "Selection mode override: population|generational");
  cmd->add_option("--gaussian", opts.gaussian, "Dispersion override: default|scaled");
  cmd->add_option("--random-seeds", opts.random_seeds, "Initial sowing size override");
  cmd->add_option("--threshold", opts.threshold, "Selection threshold override");
  cmd->add_option("--s-max", opts.s_max, "Maximum seeds per plant override");
  cmd->add_option("--radius", opts.radius, "Pollination radius override");
  cmd->add_option("--iterations", opts.iterations, "Iteration budget override");
}

bool passed(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

paddy::BenchmarkSpec to_spec(const CLI::App* cmd, const RunOptions& opts) {
  paddy::BenchmarkSpec spec;
  spec.name = opts.benchmark;
  spec.runs = opts.runs;
  spec.base_seed = opts.seed;
  spec.out_dir = opts.out_dir;
  spec.save_trials = opts.save_trials;
  if (passed(cmd, "--mode")) spec.mode = paddy::parse_mode(opts.mode);
  if (passed(cmd, "--gaussian")) spec.gaussian = paddy::parse_gaussian_kind(opts.gaussian);
  if (passed(cmd, "--random-seeds")) spec.random_seed_count = opts.random_seeds;
  if (passed(cmd, "--threshold")) spec.threshold = opts.threshold;
  if (passed(cmd, "--s-max")) spec.s_max = opts.s_max;
  if (passed(cmd, "--radius")) spec.radius = opts.radius;
  if (passed(cmd, "--iterations")) spec.iterations = opts.iterations;
  return spec;
}

void print_summary(const std::string& name, const paddy::RunSummary& summary, bool as_mse) {
  std::cout << "benchmark=" << name << " runs=" << summary.rows.size()
            << " best_fitness=" << paddy::format_double(summary.best)
            << " worst_fitness=" << paddy::format_double(summary.worst)
            << " mean_fitness=" << paddy::format_double(summary.mean)
            << " sd=" << paddy::format_double(summary.sd)
            << (summary.sd_defined ? "" : " (sd undefined for a single run)") << '\n';
  if (as_mse) {
    std::cout << "  as MSE: best=" << paddy::format_double(-summary.best)
              << " worst=" << paddy::format_double(-summary.worst)
              << " mean=" << paddy::format_double(-summary.mean) << '\n';
  }
}

int command_run(const CLI::App* cmd, const RunOptions& opts) {
  const paddy::BenchmarkSpec spec = to_spec(cmd, opts);
  const bool as_mse = paddy::make_benchmark(spec.name).report_as_mse;
  const paddy::BenchmarkOutput output = paddy::run_benchmark(spec);
  print_summary(spec.name, output.summary, as_mse);
  std::cout << "wrote " << (fs::path(opts.out_dir) / "runs.csv").string() << ", iterations.csv, summary.csv\n";
  return 0;
}

int command_baseline(const CLI::App* cmd, const RunOptions& opts, std::int64_t evals) {
  paddy::BenchmarkSpec spec = to_spec(cmd, opts);
  const bool as_mse = paddy::make_benchmark(spec.name).report_as_mse;
  const paddy::BenchmarkOutput output = paddy::random_search_baseline(spec, evals);
  print_summary(spec.name + " (random baseline)", output.summary, as_mse);
  std::cout << "wrote " << (fs::path(opts.out_dir) / "runs.csv").string() << ", iterations.csv, summary.csv\n";
  return 0;
}

int command_resume(const std::string& trial_file, const std::string& benchmark_name,
                   int extra_iterations, const std::string& out_dir,
                   const std::string& save_path) {
  std::ifstream in(trial_file);
  if (!in) {
    std::cerr << "cannot open trial file '" << trial_file << "'\n";
    return 1;
  }
  paddy::RunnerState state = paddy::load_trial(in);
  const paddy::Benchmark bench = paddy::make_benchmark(benchmark_name);
  if (state.space.dimension() != bench.space.dimension())
    throw paddy::config_error("trial space dimension does not match benchmark '" +
                              benchmark_name + "'");

  if (extra_iterations > 0) {
    state.config.iterations += extra_iterations;
    if (state.terminated &&
        state.termination_reason == paddy::TerminationReason::IterationLimit) {
      state.terminated = false;
      state.termination_reason.reset();
    }
  }

  std::vector<paddy::IterationRow> rows;
  while (!state.terminated) {
    const paddy::IterationReport report = paddy::step(state, bench.objective);
    if (report.new_plant_count > 0)
      rows.push_back({0, report.iteration, report.best_fitness, report.mean_new_fitness});
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    paddy::write_iterations_csv(fs::path(out_dir) / "resumed_iterations.csv", rows);
  }
  if (!save_path.empty()) {
    std::ofstream out(save_path);
    if (!out) {
      std::cerr << "cannot open '" << save_path << "' for writing\n";
      return 1;
    }
    paddy::save_trial(state, out);
  }

  const paddy::Plant best = paddy::best_plant(state);
  std::cout << "resumed run finished at iteration " << state.iteration << " ("
            << paddy::to_string(*state.termination_reason) << "), " << state.population.size()
            << " evaluations, best fitness " << paddy::format_double(best.fitness) << '\n';
  return 0;
}

int command_score(const std::string& features_file, const std::string& target_file, double alpha,
                  double beta, const std::string& out_path) {
  std::ifstream target_in(target_file);
  if (!target_in) {
    std::cerr << "cannot open target fingerprint file '" << target_file << "'\n";
    return 1;
  }
  const paddy::Fingerprint target = paddy::read_fingerprint(target_in);

  std::ifstream features_in(features_file);
  if (!features_in) {
    std::cerr << "cannot open features file '" << features_file << "'\n";
    return 1;
  }
  const std::vector<paddy::MoleculeFeatures> records =
      paddy::read_molecule_features(features_in);

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file_out.open(out_path);
    if (!file_out) {
      std::cerr << "cannot open '" << out_path << "' for writing\n";
      return 1;
    }
    out = &file_out;
  }

  *out << "record,tversky,rbs,ccs,bos,score\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const paddy::MoleculeFeatures& m = records[i];
    const double tv = m.fingerprint.empty() ? 0.0 : paddy::tversky(m.fingerprint, target, alpha, beta);
    *out << i << ',' << paddy::format_double(tv) << ','
         << paddy::format_double(paddy::rotatable_bond_score(m.rotatable_bonds)) << ','
         << paddy::format_double(paddy::cycle_count_score(m.cycle_count)) << ','
         << paddy::format_double(paddy::bit_on_score(m.on_bits)) << ','
         << paddy::format_double(paddy::custom_metric(m, target, alpha, beta)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paddy field algorithm optimizer and benchmark harness"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Execute repeated runs of a named benchmark");
  run_cmd->add_option("--benchmark", run_opts.benchmark, "bimodal|gramacy-lee|surrogate-mlp")
      ->required();
  run_cmd->add_option("--runs", run_opts.runs, "Number of independent runs");
  run_cmd->add_option("--seed", run_opts.seed, "Base rng seed; run k uses seed+k");
  run_cmd->add_option("--out-dir", run_opts.out_dir, "Output directory for CSV files");
  run_cmd->add_flag("--save-trials", run_opts.save_trials, "Write a trial document per run");
  add_override_flags(run_cmd, run_opts);

  RunOptions baseline_opts;
  std::int64_t baseline_evals = 5000;
  auto* baseline_cmd =
      app.add_subcommand("random-baseline", "Uniform random search over the initiation grids");
  baseline_cmd->add_option("--benchmark", baseline_opts.benchmark, "Benchmark whose space to sample")
      ->required();
  baseline_cmd->add_option("--evals", baseline_evals, "Evaluations per execution");
  baseline_cmd->add_option("--runs", baseline_opts.runs, "Number of executions");
  baseline_cmd->add_option("--seed", baseline_opts.seed, "Base rng seed");
  baseline_cmd->add_option("--out-dir", baseline_opts.out_dir, "Output directory for CSV files");

  std::string trial_file, resume_benchmark, resume_out_dir = "paddy_out", resume_save;
  int extra_iterations = 0;
  auto* resume_cmd = app.add_subcommand("resume", "Continue a saved trial until termination");
  resume_cmd->add_option("trial-file", trial_file, "Trial document written by save-trials")
      ->required();
  resume_cmd->add_option("--benchmark", resume_benchmark, "Objective to evaluate with")->required();
  resume_cmd->add_option("--extra-iterations", extra_iterations,
                         "Extend the iteration budget before resuming");
  resume_cmd->add_option("--out-dir", resume_out_dir, "Output directory for CSV files");
  resume_cmd->add_option("--save-trial", resume_save, "Write the final state to this file");

  std::string features_file, target_file, score_out;
  double alpha = 0.5, beta = 0.01;
  auto* score_cmd =
      app.add_subcommand("score-molecules", "Score precomputed molecule feature records");
  score_cmd->add_option("features-file", features_file, "Feature table, one record per line")
      ->required();
  score_cmd->add_option("--target-fp", target_file, "Target fingerprint on-bit list")->required();
  score_cmd->add_option("--alpha", alpha, "Tversky weight for bits only in the candidate");
  score_cmd->add_option("--beta", beta, "Tversky weight for bits only in the target");
  score_cmd->add_option("--out", score_out, "Output CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return command_run(run_cmd, run_opts);
    if (baseline_cmd->parsed()) return command_baseline(baseline_cmd, baseline_opts, baseline_evals);
    if (resume_cmd->parsed())
      return command_resume(trial_file, resume_benchmark, extra_iterations, resume_out_dir,
                            resume_save);
    if (score_cmd->parsed())
      return command_score(features_file, target_file, alpha, beta, score_out);
  } catch (const paddy::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
