// dyadflow command-line tool.
//
// Subcommands:
//   analyze   full pipeline over a recorded session -> report directory
//   simulate  generate synthetic dyad trials with known ground truth
//   surrogate permutation null threshold for a session -> CSV
//   report    re-render SVG plots from an existing report directory
//
// Exit codes: 0 success; 1 runtime failure (including any dyad failing inside
// an otherwise successful analyze run); 2 configuration or parse errors.

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dyadflow/pipeline.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int classify(const dyadflow::Error& e) {
  const std::string& c = e.code();
  return (c == "config-error" || c == "parse-error" || c == "not-found") ? 2 : 1;
}

int cmd_analyze(const std::string& input_dir, const std::string& config_path,
                const std::string& out_dir, bool seed_set, uint64_t seed_override) {
  std::vector<std::pair<std::string, double>> stages;
  auto t0 = Clock::now();

  dyadflow::PipelineConfig cfg;
  if (!config_path.empty()) cfg = dyadflow::read_pipeline_config(config_path);
  if (seed_set) cfg.seed = seed_override;

  const std::string manifest = input_dir + "/session.manifest";
  const dyadflow::SessionManifest session = dyadflow::read_session_manifest(manifest);
  const std::vector<dyadflow::TrialRecord> trials = dyadflow::load_session(manifest);
  stages.emplace_back("load", seconds_since(t0));

  t0 = Clock::now();
  const dyadflow::AnalysisReport rep = dyadflow::run_analysis(trials, session.dyads, cfg);
  stages.emplace_back("analyze", seconds_since(t0));

  t0 = Clock::now();
  dyadflow::write_report(out_dir, rep, stages);
  std::cout << "report written to " << out_dir << " (" << rep.dyads.size() - rep.n_failed << "/"
            << rep.dyads.size() << " dyads analyzed)\n";
  for (const std::string& line : rep.log) std::cerr << line << "\n";
  return rep.n_failed > 0 ? 1 : 0;
}

int cmd_simulate(const std::string& config_path, int n_trials, const std::string& out_dir) {
  dyadflow::SimConfig cfg;
  if (!config_path.empty()) cfg = dyadflow::read_sim_config(config_path);
  dyadflow::run_simulate(cfg, n_trials, out_dir);
  std::cout << "wrote " << cfg.n_dyads * n_trials << " trial(s) for " << cfg.n_dyads
            << " dyad(s) to " << out_dir << "\n";
  return 0;
}

int cmd_surrogate(const std::string& input_dir, const std::string& config_path, int n_perm,
                  bool seed_set, uint64_t seed, const std::string& out_file) {
  dyadflow::PipelineConfig cfg;
  if (!config_path.empty()) cfg = dyadflow::read_pipeline_config(config_path);
  if (n_perm > 0) cfg.n_perm = n_perm;
  if (seed_set) cfg.seed = seed;
  const dyadflow::ThresholdCurve thr =
      dyadflow::run_surrogate(input_dir, cfg.n_perm, cfg.seed, cfg);
  dyadflow::write_threshold_csv(out_file, thr);
  std::cout << "threshold over " << thr.freqs.size() << " bins (" << thr.n_perm
            << " permutations) written to " << out_file << "\n";
  return 0;
}

int cmd_report(const std::string& analysis_dir, const std::string& out_dir) {
  dyadflow::render_report_plots(analysis_dir, out_dir);
  std::cout << "plots written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadflow: directional force-interaction analysis for dyadic recordings"};
  app.set_version_flag("--version", "dyadflow " + dyadflow::tool_version());
  app.require_subcommand(1);

  // analyze
  std::string in_dir, out_dir, config_path;
  uint64_t seed = 0;
  auto* analyze = app.add_subcommand("analyze", "Run the full analysis pipeline on a session");
  analyze->add_option("--input", in_dir, "Session directory containing session.manifest")
      ->required();
  analyze->add_option("--config", config_path, "Pipeline config file (key = value)");
  analyze->add_option("--out", out_dir, "Report output directory")->required();
  auto* seed_opt = analyze->add_option("--seed", seed, "Override the surrogate seed");

  // simulate
  std::string sim_config, sim_out;
  int n_trials = 1;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic dyad trials");
  simulate->add_option("--config", sim_config, "Simulator config file (key = value)");
  simulate->add_option("--trials", n_trials, "Trials per dyad")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();

  // surrogate
  std::string sur_in, sur_out, sur_config;
  int n_perm = 0;
  uint64_t sur_seed = 0;
  auto* surrogate = app.add_subcommand("surrogate", "Compute the permutation null threshold");
  surrogate->add_option("--input", sur_in, "Session directory containing session.manifest")
      ->required();
  surrogate->add_option("--config", sur_config, "Pipeline config file (key = value)");
  surrogate->add_option("--n-perm", n_perm, "Number of permutation pairs");
  auto* sur_seed_opt = surrogate->add_option("--seed", sur_seed, "Permutation RNG seed");
  surrogate->add_option("--out", sur_out, "Output threshold CSV")->required();

  // report
  std::string rep_in, rep_out;
  auto* report = app.add_subcommand("report", "Re-render plots from a report directory");
  report->add_option("--analysis", rep_in, "Existing report directory")->required();
  report->add_option("--out", rep_out, "Directory for the regenerated SVG plots")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) {
      return cmd_analyze(in_dir, config_path, out_dir, seed_opt->count() > 0, seed);
    }
    if (app.got_subcommand(simulate)) return cmd_simulate(sim_config, n_trials, sim_out);
    if (app.got_subcommand(surrogate)) {
      return cmd_surrogate(sur_in, sur_config, n_perm, sur_seed_opt->count() > 0, sur_seed,
                           sur_out);
    }
    if (app.got_subcommand(report)) return cmd_report(rep_in, rep_out);
  } catch (const dyadflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
