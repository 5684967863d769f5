#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dyadflow/behavior.hpp"
#include "dyadflow/ggc.hpp"
#include "dyadflow/io.hpp"
#include "dyadflow/sim.hpp"
#include "dyadflow/stats.hpp"
#include "dyadflow/surrogate.hpp"

namespace dyadflow {

enum class BandMode { automatic, fixed };

// All tunables of the analysis pipeline; defaults mirror the documented
// processing chain (10 Hz order-2 dual-pass filter, 25 Hz decimation,
// 3 windows per trial, AIC order selection to 20, 0.05 Hz grid, 506
// permutations at the 99th percentile).
struct PipelineConfig {
  double filter_fc_hz = 10.0;
  int filter_order = 2;
  double downsample_fs_hz = 25.0;
  int epochs_per_trial = 3;
  int p_max = 20;
  int fixed_p = 0;  // 0 = AIC selection
  double freq_step_hz = 0.05;
  double freq_max_hz = 0.0;  // 0 = Nyquist of the downsampled rate
  int n_perm = 506;
  uint64_t seed = 2024;
  BandMode band_mode = BandMode::automatic;
  double fixed_f1_hz = 0.0;  // used when band_mode == fixed
  double fixed_f2_hz = 0.0;
  std::string pe_normalizer = "distance";  // "distance" | "width"
  double target_width_m = 0.03;
  double prominence_fraction = 0.05;
  double normality_alpha = 0.05;
  // Segment mass-fraction table; needed only when a manifest specifies
  // participant body masses instead of explicit arm masses.
  std::string coefficients_path;
};

// key = value config file; unknown keys are an error (catches typos).
PipelineConfig read_pipeline_config(const std::string& path);
void write_pipeline_config(const std::string& path, const PipelineConfig& c);

struct DyadAnalysis {
  std::string dyad_id;
  GgcSpectrum spectrum;
  std::vector<BandInfluence> bands;
  bool failed = false;
  std::string error;
};

struct StatsRow {
  std::string name;     // e.g. "high_band_delta_vs_zero"
  TestResult result;
  std::string route;    // for gated tests, else ""
};

struct AnalysisReport {
  std::vector<DyadAnalysis> dyads;
  ThresholdCurve threshold;
  BandBoundaries boundaries;
  std::vector<PerformanceSummary> performance;  // per trial
  std::vector<DyadErrorSummary> pe_by_dyad;
  std::vector<DyadErrorSummary> se_by_dyad;
  ExclusionOutcome exclusions_pe;
  ExclusionOutcome exclusions_se;
  std::vector<std::string> excluded_dyads;  // union, sorted
  std::vector<StatsRow> stats;
  std::vector<std::string> log;  // deterministic event lines (no timings)
  uint64_t config_hash = 0;      // FNV-1a of the canonical config serialization
  uint64_t seed = 0;
  std::string version;
  int n_failed = 0;
};

// Full pipeline: preprocess + force reconstruction + GGC per dyad,
// permutation threshold over the pooled individuals, band boundaries,
// band integrals, behavior metrics with exclusion, and the standard test
// battery. A failing dyad is recorded and skipped, never fatal.
AnalysisReport run_analysis(const std::vector<TrialRecord>& trials,
                            const std::vector<DyadConfig>& dyads, const PipelineConfig& cfg);

// Writes the report directory: spectra/<dyad>.csv, threshold.csv, bands.csv,
// boundaries.csv, performance.csv, stats.csv, plots/<dyad>.svg,
// provenance.txt, run.log (timings; the only non-deterministic file).
void write_report(const std::string& out_dir, const AnalysisReport& r,
                  const std::vector<std::pair<std::string, double>>& stage_seconds);

// Rebuild the SVG plots of an existing report directory from its CSVs.
void render_report_plots(const std::string& analysis_dir, const std::string& out_dir);

// Simulator driver: writes n_trials trial CSVs per dyad (base.n_dyads
// dyads) plus session.manifest and ground_truth.txt under out_dir. The
// trial with index t of dyad d uses seed base.seed + d*n_trials + t.
void run_simulate(const SimConfig& base, int n_trials, const std::string& out_dir);
SimConfig read_sim_config(const std::string& path);
void write_sim_config(const std::string& path, const SimConfig& c);

// Surrogate driver: threshold CSV from the trials under input_dir.
ThresholdCurve run_surrogate(const std::string& input_dir, int n_perm, uint64_t seed,
                             const PipelineConfig& cfg);

// Preprocessing shared by analysis and surrogate pool construction:
// filter both sensor channels, reconstruct forces, decimate, epoch.
std::vector<EpochPair> preprocess_trial(const TrialRecord& t, const DyadMasses& m,
                                        const PipelineConfig& cfg);

std::string tool_version();

}  // namespace dyadflow
