#include "dyadflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "dyadflow/force.hpp"
#include "dyadflow/signal.hpp"
#include "dyadflow/svg.hpp"

namespace fs = std::filesystem;

namespace dyadflow {

std::string tool_version() { return "0.1.0"; }

// ------------------------------------------------------------- config I/O

namespace {

std::string band_mode_name(BandMode m) { return m == BandMode::automatic ? "auto" : "fixed"; }

std::string canonical_config(const PipelineConfig& c) {
  std::ostringstream out;
  out << "filter.fc_hz = " << format_double(c.filter_fc_hz) << "\n";
  out << "filter.order = " << c.filter_order << "\n";
  out << "downsample.fs_hz = " << format_double(c.downsample_fs_hz) << "\n";
  out << "epochs_per_trial = " << c.epochs_per_trial << "\n";
  out << "var.p_max = " << c.p_max << "\n";
  out << "var.fixed_p = " << c.fixed_p << "\n";
  out << "freq.step_hz = " << format_double(c.freq_step_hz) << "\n";
  out << "freq.max_hz = " << format_double(c.freq_max_hz) << "\n";
  out << "surrogate.n_perm = " << c.n_perm << "\n";
  out << "surrogate.seed = " << c.seed << "\n";
  out << "bands.mode = " << band_mode_name(c.band_mode) << "\n";
  out << "bands.f1_hz = " << format_double(c.fixed_f1_hz) << "\n";
  out << "bands.f2_hz = " << format_double(c.fixed_f2_hz) << "\n";
  out << "pe.normalizer = " << c.pe_normalizer << "\n";
  out << "pe.width_m = " << format_double(c.target_width_m) << "\n";
  out << "extrema.prominence_fraction = " << format_double(c.prominence_fraction) << "\n";
  out << "stats.normality_alpha = " << format_double(c.normality_alpha) << "\n";
  out << "coefficients.path = " << c.coefficients_path << "\n";
  return out.str();
}

void validate_pipeline_config(const PipelineConfig& c) {
  if (c.filter_fc_hz <= 0.0 || c.filter_order < 1) {
    throw Error("config-error", "filter settings invalid");
  }
  if (c.downsample_fs_hz <= 0.0 || c.epochs_per_trial < 1) {
    throw Error("config-error", "downsample rate and epochs_per_trial must be positive");
  }
  if (c.p_max < 1 || c.fixed_p < 0) throw Error("config-error", "VAR order settings invalid");
  if (c.freq_step_hz <= 0.0 || c.freq_max_hz < 0.0) {
    throw Error("config-error", "frequency grid settings invalid");
  }
  if (c.n_perm < 1) throw Error("config-error", "surrogate.n_perm must be >= 1");
  if (c.band_mode == BandMode::fixed &&
      !(0.0 < c.fixed_f1_hz && c.fixed_f1_hz < c.fixed_f2_hz)) {
    throw Error("config-error", "fixed bands need 0 < f1 < f2");
  }
  if (c.pe_normalizer != "distance" && c.pe_normalizer != "width") {
    throw Error("config-error", "pe.normalizer must be 'distance' or 'width'");
  }
  if (c.pe_normalizer == "width" && c.target_width_m <= 0.0) {
    throw Error("config-error", "pe.width_m must be positive");
  }
  if (c.prominence_fraction <= 0.0 || c.prominence_fraction >= 1.0) {
    throw Error("config-error", "extrema.prominence_fraction must lie in (0, 1)");
  }
  if (c.normality_alpha <= 0.0 || c.normality_alpha >= 1.0) {
    throw Error("config-error", "stats.normality_alpha must lie in (0, 1)");
  }
}

}  // namespace

PipelineConfig read_pipeline_config(const std::string& path) {
  PipelineConfig c;
  for (const auto& [key, value] : read_kv_file(path)) {
    const std::string ctx = path + ": " + key;
    if (key == "filter.fc_hz") {
      c.filter_fc_hz = parse_double(value, ctx);
    } else if (key == "filter.order") {
      c.filter_order = static_cast<int>(parse_double(value, ctx));
    } else if (key == "downsample.fs_hz") {
      c.downsample_fs_hz = parse_double(value, ctx);
    } else if (key == "epochs_per_trial") {
      c.epochs_per_trial = static_cast<int>(parse_double(value, ctx));
    } else if (key == "var.p_max") {
      c.p_max = static_cast<int>(parse_double(value, ctx));
    } else if (key == "var.fixed_p") {
      c.fixed_p = static_cast<int>(parse_double(value, ctx));
    } else if (key == "freq.step_hz") {
      c.freq_step_hz = parse_double(value, ctx);
    } else if (key == "freq.max_hz") {
      c.freq_max_hz = parse_double(value, ctx);
    } else if (key == "surrogate.n_perm") {
      c.n_perm = static_cast<int>(parse_double(value, ctx));
    } else if (key == "surrogate.seed") {
      try {
        c.seed = std::stoull(value);
      } catch (const std::exception&) {
        throw Error("config-error", ctx + ": seed must be an unsigned integer");
      }
    } else if (key == "bands.mode") {
      if (value == "auto") {
        c.band_mode = BandMode::automatic;
      } else if (value == "fixed") {
        c.band_mode = BandMode::fixed;
      } else {
        throw Error("config-error", ctx + ": bands.mode must be auto or fixed");
      }
    } else if (key == "bands.f1_hz") {
      c.fixed_f1_hz = parse_double(value, ctx);
    } else if (key == "bands.f2_hz") {
      c.fixed_f2_hz = parse_double(value, ctx);
    } else if (key == "pe.normalizer") {
      c.pe_normalizer = value;
    } else if (key == "pe.width_m") {
      c.target_width_m = parse_double(value, ctx);
    } else if (key == "extrema.prominence_fraction") {
      c.prominence_fraction = parse_double(value, ctx);
    } else if (key == "stats.normality_alpha") {
      c.normality_alpha = parse_double(value, ctx);
    } else if (key == "coefficients.path") {
      c.coefficients_path = value;
    } else {
      throw Error("config-error", path + ": unknown key '" + key + "'");
    }
  }
  validate_pipeline_config(c);
  return c;
}

void write_pipeline_config(const std::string& path, const PipelineConfig& c) {
  std::ofstream out(path);
  if (!out) throw Error("not-found", "cannot write " + path);
  out << canonical_config(c);
}

// ----------------------------------------------------------- preprocessing

std::vector<EpochPair> preprocess_trial(const TrialRecord& t, const DyadMasses& m,
                                        const PipelineConfig& cfg) {
  const Channel s1f = butterworth_lowpass_dualpass(t.s1, cfg.filter_fc_hz, cfg.filter_order);
  const Channel s2f = butterworth_lowpass_dualpass(t.s2, cfg.filter_fc_hz, cfg.filter_order);
  const ForcePair forces = reconstruct_forces(s1f, s2f, m);
  const Channel f1d = decimate(forces.f1, cfg.downsample_fs_hz);
  const Channel f2d = decimate(forces.f2, cfg.downsample_fs_hz);
  const auto ea = epoch_split(f1d, cfg.epochs_per_trial, t.trial_id);
  const auto eb = epoch_split(f2d, cfg.epochs_per_trial, t.trial_id);
  std::vector<EpochPair> out;
  out.reserve(ea.size());
  for (size_t k = 0; k < ea.size(); ++k) out.push_back({ea[k], eb[k]});
  return out;
}

namespace {

// Truncate a grid-aligned report to freq.max_hz (Wilson and the VAR spectra
// always evaluate the full 0..Nyquist grid; only reporting narrows).
template <typename T>
void truncate_curve(std::vector<double>& freqs, std::vector<T>& curve, double fmax) {
  size_t keep = freqs.size();
  while (keep > 0 && freqs[keep - 1] > fmax + 1e-9) --keep;
  freqs.resize(keep);
  curve.resize(keep);
}

void truncate_spectrum(GgcSpectrum& g, double fmax) {
  std::vector<double> f2 = g.freqs;
  truncate_curve(g.freqs, g.a_to_b, fmax);
  truncate_curve(f2, g.b_to_a, fmax);
}

DyadErrorSummary combine_error_stats(const std::string& dyad_id,
                                     const std::vector<ErrorStats>& parts) {
  DyadErrorSummary s;
  s.dyad_id = dyad_id;
  double total_n = 0.0, mean = 0.0;
  for (const ErrorStats& p : parts) {
    total_n += p.n;
    mean += static_cast<double>(p.n) * p.mean;
  }
  if (total_n < 1.0) throw Error("no-data", "no error observations for dyad " + dyad_id);
  mean /= total_n;
  double ss = 0.0;
  for (const ErrorStats& p : parts) {
    ss += (p.n - 1.0) * p.sd * p.sd + static_cast<double>(p.n) * (p.mean - mean) * (p.mean - mean);
  }
  s.mean = mean;
  s.sd = total_n > 1.0 ? std::sqrt(ss / (total_n - 1.0)) : 0.0;
  s.n = static_cast<int>(total_n);
  return s;
}

struct DyadWork {
  const DyadConfig* config = nullptr;
  DyadMasses masses;
  std::vector<const TrialRecord*> trials;
  std::vector<EpochPair> epochs;
  std::vector<Epoch> epochs_a, epochs_b;  // split by participant, for the pool
  // force summaries
  std::vector<double> mean_abs_a, mean_abs_b;
  std::vector<double> freq_content_a, freq_content_b;
  bool preprocessed = false;
};

// Fills in arm masses given as body mass + sex, loading the segment table on
// first use.
DyadMasses resolve_masses(const DyadConfig& d, const PipelineConfig& cfg,
                          std::optional<std::vector<SegmentRow>>& table_cache) {
  DyadMasses m = d.masses;
  if (m.m1 > 0.0 && m.m2 > 0.0) return m;
  if (!table_cache) {
    if (cfg.coefficients_path.empty()) {
      throw Error("config-error",
                  "dyad " + d.dyad_id + " gives body mass but coefficients.path is not set");
    }
    table_cache = load_segment_coefficients(cfg.coefficients_path);
  }
  if (m.m1 <= 0.0) m.m1 = effective_arm_mass(d.body_mass_a_kg, d.sex_a, *table_cache);
  if (m.m2 <= 0.0) m.m2 = effective_arm_mass(d.body_mass_b_kg, d.sex_b, *table_cache);
  return m;
}

}  // namespace

AnalysisReport run_analysis(const std::vector<TrialRecord>& trials,
                            const std::vector<DyadConfig>& dyads, const PipelineConfig& cfg) {
  validate_pipeline_config(cfg);
  if (trials.empty()) throw Error("no-data", "no trials to analyze");

  AnalysisReport rep;
  rep.config_hash = fnv1a64(canonical_config(cfg));
  rep.seed = cfg.seed;
  rep.version = tool_version();

  std::map<std::string, DyadWork> work;
  for (const DyadConfig& d : dyads) work[d.dyad_id].config = &d;
  for (const TrialRecord& t : trials) {
    const auto it = work.find(t.dyad_id);
    if (it == work.end()) {
      throw Error("config-error", "trial " + t.trial_id + " references unknown dyad " + t.dyad_id);
    }
    it->second.trials.push_back(&t);
  }

  const GgcOptions ggc_opt{cfg.p_max, cfg.fixed_p, cfg.freq_step_hz};
  const double nyq = cfg.downsample_fs_hz / 2.0;
  const double fmax = cfg.freq_max_hz > 0.0 ? std::min(cfg.freq_max_hz, nyq) : nyq;

  // Per-dyad preprocessing and parametric influence spectra; failures are
  // recorded and the dyad dropped from every later stage.
  std::optional<std::vector<SegmentRow>> table_cache;
  for (auto& [dyad_id, w] : work) {
    DyadAnalysis da;
    da.dyad_id = dyad_id;
    try {
      if (w.trials.empty()) throw Error("no-data", "dyad has no trials");
      w.masses = resolve_masses(*w.config, cfg, table_cache);
      for (const TrialRecord* t : w.trials) {
        auto eps = preprocess_trial(*t, w.masses, cfg);
        for (auto& ep : eps) {
          w.epochs_a.push_back(ep.a);
          w.epochs_b.push_back(ep.b);
          w.epochs.push_back(std::move(ep));
        }
        // Reconstructed (filtered, full-rate) forces feed the behavior-side
        // force summaries.
        const Channel s1f =
            butterworth_lowpass_dualpass(t->s1, cfg.filter_fc_hz, cfg.filter_order);
        const Channel s2f =
            butterworth_lowpass_dualpass(t->s2, cfg.filter_fc_hz, cfg.filter_order);
        const ForcePair forces = reconstruct_forces(s1f, s2f, w.masses);
        const ForceSummary fsum =
            force_summaries(forces.f1, forces.f2, cfg.prominence_fraction);
        w.mean_abs_a.push_back(fsum.mean_abs_f1);
        w.mean_abs_b.push_back(fsum.mean_abs_f2);
        w.freq_content_a.insert(w.freq_content_a.end(), fsum.hist_f1.frequencies.begin(),
                                fsum.hist_f1.frequencies.end());
        w.freq_content_b.insert(w.freq_content_b.end(), fsum.hist_f2.frequencies.begin(),
                                fsum.hist_f2.frequencies.end());
      }
      w.preprocessed = true;
      GgcResult r = ggc_from_epochs(w.epochs, ggc_opt);
      da.spectrum = std::move(r.spectrum);
      truncate_spectrum(da.spectrum, fmax);
    } catch (const Error& e) {
      da.failed = true;
      da.error = e.what();
      rep.log.push_back("dyad " + dyad_id + " failed: " + e.what());
      ++rep.n_failed;
    }
    rep.dyads.push_back(std::move(da));
  }

  // Permutation null over the pooled individuals of all healthy dyads.
  std::vector<IndividualSeries> pool;
  for (const auto& [dyad_id, w] : work) {
    if (!w.preprocessed) continue;
    pool.push_back({dyad_id + ":a", dyad_id, w.epochs_a});
    pool.push_back({dyad_id + ":b", dyad_id, w.epochs_b});
  }
  const SurrogateEnsemble ens = surrogate_ensemble(std::move(pool), cfg.n_perm, cfg.seed, ggc_opt);
  if (ens.n_skipped > 0) {
    std::fprintf(stderr, "warning: %d unstable surrogate draw(s) skipped and redrawn\n",
                 ens.n_skipped);
  }
  rep.threshold = threshold_from_ensemble(ens);
  truncate_curve(rep.threshold.freqs, rep.threshold.q99, fmax);

  // Band boundaries: automatic follows the two-step procedure with the
  // metronome-hearing participant's outgoing curve designated per dyad.
  std::vector<GgcSpectrum> ok_spectra;
  std::vector<int> designated;
  std::vector<std::string> ok_ids;
  for (const DyadAnalysis& da : rep.dyads) {
    if (da.failed) continue;
    ok_spectra.push_back(da.spectrum);
    ok_ids.push_back(da.dyad_id);
    const DyadConfig* dc = work[da.dyad_id].config;
    int dir = -1;
    if (dc->role_a == "synch") dir = 0;
    if (dc->role_b == "synch") dir = 1;
    designated.push_back(dir);
  }
  if (cfg.band_mode == BandMode::fixed) {
    rep.boundaries.f1_hz = cfg.fixed_f1_hz;
    rep.boundaries.f2_hz = cfg.fixed_f2_hz;
  } else {
    rep.boundaries = band_boundaries(ok_spectra, designated, rep.threshold.q99, {}, ok_ids);
    for (const std::string& who : rep.boundaries.missing_peak) {
      rep.log.push_back("band boundaries: no qualifying first peak for " + who);
    }
    if (rep.boundaries.f2_capped) {
      rep.log.push_back("band boundaries: no persistent sub-threshold run; f2 capped at grid end");
    }
  }

  for (DyadAnalysis& da : rep.dyads) {
    if (da.failed) continue;
    da.bands = delta_influence(da.spectrum, rep.boundaries);
  }

  // Behavior metrics per trial, pooled per dyad, then the exclusion rule.
  PerformanceOptions perf_opt;
  perf_opt.reversal_prominence_fraction = cfg.prominence_fraction;
  if (cfg.pe_normalizer == "width") perf_opt.normalizer_m = cfg.target_width_m;
  std::map<std::string, std::vector<ErrorStats>> pe_parts, se_parts;
  for (const auto& [dyad_id, w] : work) {
    if (!w.preprocessed) continue;
    for (const TrialRecord* t : w.trials) {
      try {
        PerformanceSummary ps = trial_performance(*t, perf_opt);
        pe_parts[dyad_id].push_back(ps.pe);
        se_parts[dyad_id].push_back(ps.se);
        rep.performance.push_back(std::move(ps));
      } catch (const Error& e) {
        rep.log.push_back("trial " + t->trial_id + " behavior metrics skipped: " + e.what());
      }
    }
  }
  for (const auto& [dyad_id, parts] : pe_parts) {
    rep.pe_by_dyad.push_back(combine_error_stats(dyad_id, parts));
  }
  for (const auto& [dyad_id, parts] : se_parts) {
    rep.se_by_dyad.push_back(combine_error_stats(dyad_id, parts));
  }
  std::set<std::string> excluded;
  if (rep.pe_by_dyad.size() >= 3) {
    rep.exclusions_pe = exclusion_filter(rep.pe_by_dyad);
    rep.exclusions_se = exclusion_filter(rep.se_by_dyad);
    for (const auto& line : rep.exclusions_pe.log) rep.log.push_back("PE " + line);
    for (const auto& line : rep.exclusions_se.log) rep.log.push_back("SE " + line);
    excluded.insert(rep.exclusions_pe.excluded.begin(), rep.exclusions_pe.excluded.end());
    excluded.insert(rep.exclusions_se.excluded.begin(), rep.exclusions_se.excluded.end());
  } else {
    rep.log.push_back("exclusion rule skipped: fewer than 3 dyads with behavior metrics");
  }
  rep.excluded_dyads.assign(excluded.begin(), excluded.end());

  // Standard test battery over the retained dyads.
  std::map<std::string, double> pe_mean_by_id;
  for (const DyadErrorSummary& s : rep.pe_by_dyad) pe_mean_by_id[s.dyad_id] = s.mean;
  std::vector<double> hi_ab, hi_ba, lo_ab, lo_ba, amp_a, amp_b, pe_means, hi_delta;
  std::vector<double> pooled_freq_a, pooled_freq_b;
  for (const DyadAnalysis& da : rep.dyads) {
    if (da.failed || excluded.count(da.dyad_id)) continue;
    for (const BandInfluence& b : da.bands) {
      (b.name == "high" ? hi_ab : lo_ab).push_back(b.integral_ab);
      (b.name == "high" ? hi_ba : lo_ba).push_back(b.integral_ba);
      // The PE correlation needs one (PE, delta) pair per dyad.
      if (b.name == "high" && pe_mean_by_id.count(da.dyad_id)) {
        hi_delta.push_back(b.delta);
        pe_means.push_back(pe_mean_by_id[da.dyad_id]);
      }
    }
    const DyadWork& w = work[da.dyad_id];
    double ma = 0.0, mb = 0.0;
    for (double v : w.mean_abs_a) ma += v;
    for (double v : w.mean_abs_b) mb += v;
    if (!w.mean_abs_a.empty()) {
      amp_a.push_back(ma / static_cast<double>(w.mean_abs_a.size()));
      amp_b.push_back(mb / static_cast<double>(w.mean_abs_b.size()));
    }
    pooled_freq_a.insert(pooled_freq_a.end(), w.freq_content_a.begin(), w.freq_content_a.end());
    pooled_freq_b.insert(pooled_freq_b.end(), w.freq_content_b.begin(), w.freq_content_b.end());
  }
  const auto add_gated = [&](const std::string& name, const std::vector<double>& x,
                             const std::vector<double>& y, bool paired) {
    try {
      GatedResult g = gated_compare(x, y, paired, cfg.normality_alpha);
      rep.stats.push_back({name, g.test, g.route});
    } catch (const Error& e) {
      rep.log.push_back("stat " + name + " skipped: " + e.what());
    }
  };
  add_gated("high_band_influence_ab_vs_ba", hi_ab, hi_ba, /*paired=*/true);
  add_gated("low_band_influence_ab_vs_ba", lo_ab, lo_ba, /*paired=*/true);
  add_gated("mean_abs_force_a_vs_b", amp_a, amp_b, /*paired=*/true);
  try {
    rep.stats.push_back(
        {"force_freq_content_ks", ks_two_sample(pooled_freq_a, pooled_freq_b), ""});
  } catch (const Error& e) {
    rep.log.push_back(std::string("stat force_freq_content_ks skipped: ") + e.what());
  }
  try {
    const CorrelationResult c = pearson(pe_means, hi_delta);
    TestResult tr;
    tr.statistic = c.r;
    tr.p_value = c.p_value;
    tr.n = c.n;
    tr.method = "pearson";
    rep.stats.push_back({"pe_vs_high_band_delta", tr, ""});
  } catch (const Error& e) {
    rep.log.push_back(std::string("stat pe_vs_high_band_delta skipped: ") + e.what());
  }
  return rep;
}

// ------------------------------------------------------------- report I/O

namespace {

void write_spectrum_csv(const std::string& path, const GgcSpectrum& g) {
  std::ofstream out(path);
  if (!out) throw Error("not-found", "cannot write " + path);
  out << "freq_hz,a_to_b,b_to_a\n";
  for (size_t i = 0; i < g.freqs.size(); ++i) {
    out << format_double(g.freqs[i]) << ',' << format_double(g.a_to_b[i]) << ','
        << format_double(g.b_to_a[i]) << '\n';
  }
}

GgcSpectrum read_spectrum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("not-found", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "freq_hz,a_to_b,b_to_a") {
    throw Error("parse-error", path + ":1: expected header freq_hz,a_to_b,b_to_a");
  }
  GgcSpectrum g;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw Error("parse-error", path + ":" + std::to_string(lineno) + ": expected 3 columns");
    }
    const std::string ctx = path + ":" + std::to_string(lineno);
    g.freqs.push_back(parse_double(a, ctx));
    g.a_to_b.push_back(parse_double(b, ctx));
    g.b_to_a.push_back(parse_double(c, ctx));
  }
  return g;
}

void plot_dyad(const std::string& path, const std::string& dyad_id, const GgcSpectrum& g,
               const ThresholdCurve& thr, const BandBoundaries& b) {
  SvgChart chart;
  chart.title = "Dyad " + dyad_id + " directional influence";
  chart.x_label = "Frequency (Hz)";
  chart.y_label = "Influence";
  if (b.f1_hz > 0.0 && b.f2_hz > b.f1_hz) {
    chart.bands.push_back({0.0, b.f1_hz, "#f3f3f3"});
    chart.bands.push_back({b.f1_hz, b.f2_hz, "#fdf3d7"});
  }
  chart.series.push_back({g.freqs, g.a_to_b, "#c0392b", "A to B", false});
  chart.series.push_back({g.freqs, g.b_to_a, "#2980b9", "B to A", false});
  chart.series.push_back({thr.freqs, thr.q99, "#7f8c8d", "null 99th pct", true});
  write_svg(path, chart);
}

}  // namespace

void write_report(const std::string& out_dir, const AnalysisReport& r,
                  const std::vector<std::pair<std::string, double>>& stage_seconds) {
  fs::create_directories(fs::path(out_dir) / "spectra");
  fs::create_directories(fs::path(out_dir) / "plots");

  for (const DyadAnalysis& da : r.dyads) {
    if (da.failed) continue;
    write_spectrum_csv((fs::path(out_dir) / "spectra" / (da.dyad_id + ".csv")).string(),
                       da.spectrum);
    plot_dyad((fs::path(out_dir) / "plots" / (da.dyad_id + ".svg")).string(), da.dyad_id,
              da.spectrum, r.threshold, r.boundaries);
  }
  write_threshold_csv((fs::path(out_dir) / "threshold.csv").string(), r.threshold);

  {
    std::ofstream out(fs::path(out_dir) / "boundaries.csv");
    out << "f1_hz,f2_hz,f2_capped,missing_peaks\n";
    out << format_double(r.boundaries.f1_hz) << ',' << format_double(r.boundaries.f2_hz) << ','
        << (r.boundaries.f2_capped ? 1 : 0) << ',';
    for (size_t i = 0; i < r.boundaries.missing_peak.size(); ++i) {
      if (i) out << ';';
      out << r.boundaries.missing_peak[i];
    }
    out << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "bands.csv");
    out << "dyad_id,band,f_lo_hz,f_hi_hz,integral_ab,integral_ba,delta\n";
    for (const DyadAnalysis& da : r.dyads) {
      for (const BandInfluence& b : da.bands) {
        out << da.dyad_id << ',' << b.name << ',' << format_double(b.f_lo) << ','
            << format_double(b.f_hi) << ',' << format_double(b.integral_ab) << ','
            << format_double(b.integral_ba) << ',' << format_double(b.delta) << '\n';
      }
    }
  }
  {
    std::set<std::string> excluded(r.excluded_dyads.begin(), r.excluded_dyads.end());
    std::ofstream out(fs::path(out_dir) / "performance.csv");
    out << "dyad_id,condition,pe_mean,pe_sd,se_mean,se_sd,excluded_flag\n";
    for (const PerformanceSummary& p : r.performance) {
      out << p.dyad_id << ',' << p.trial_id << ',' << format_double(p.pe.mean) << ','
          << format_double(p.pe.sd) << ',' << format_double(p.se.mean) << ','
          << format_double(p.se.sd) << ',' << (excluded.count(p.dyad_id) ? 1 : 0) << '\n';
    }
    for (size_t i = 0; i < r.pe_by_dyad.size(); ++i) {
      const DyadErrorSummary& pe = r.pe_by_dyad[i];
      const DyadErrorSummary& se = r.se_by_dyad[i];
      out << pe.dyad_id << ",overall," << format_double(pe.mean) << ',' << format_double(pe.sd)
          << ',' << format_double(se.mean) << ',' << format_double(se.sd) << ','
          << (excluded.count(pe.dyad_id) ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "stats.csv");
    out << "name,method,statistic,df,n,p_value,route\n";
    for (const StatsRow& s : r.stats) {
      out << s.name << ',' << s.result.method << ',' << format_double(s.result.statistic) << ','
          << format_double(s.result.df) << ',' << s.result.n << ','
          << format_double(s.result.p_value) << ',' << s.route << '\n';
    }
  }
  if (r.n_failed > 0) {
    std::ofstream out(fs::path(out_dir) / "failures.csv");
    out << "dyad_id,error\n";
    for (const DyadAnalysis& da : r.dyads) {
      if (da.failed) out << da.dyad_id << ",\"" << da.error << "\"\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "provenance.txt");
    out << "tool = dyadflow " << r.version << "\n";
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(r.config_hash));
    out << "config_hash = " << hex << "\n";
    out << "seed = " << r.seed << "\n";
    out << "n_dyads = " << r.dyads.size() << "\n";
    out << "n_failed = " << r.n_failed << "\n";
    out << "n_perm = " << r.threshold.n_perm << "\n";
  }
  {
    // run.log carries timings and event lines; it is the one report file
    // excluded from the byte-determinism contract.
    std::ofstream out(fs::path(out_dir) / "run.log");
    for (const auto& [stage, seconds] : stage_seconds) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "stage %s: %.3f s", stage.c_str(), seconds);
      out << buf << "\n";
    }
    for (const std::string& line : r.log) out << line << "\n";
  }
}

void render_report_plots(const std::string& analysis_dir, const std::string& out_dir) {
  const ThresholdCurve thr =
      read_threshold_csv((fs::path(analysis_dir) / "threshold.csv").string());
  BandBoundaries b;
  {
    std::ifstream in(fs::path(analysis_dir) / "boundaries.csv");
    if (!in) throw Error("not-found", "missing boundaries.csv in " + analysis_dir);
    std::string header, row;
    std::getline(in, header);
    if (std::getline(in, row)) {
      std::istringstream ss(row);
      std::string f1, f2;
      std::getline(ss, f1, ',');
      std::getline(ss, f2, ',');
      b.f1_hz = parse_double(f1, "boundaries.csv: f1_hz");
      b.f2_hz = parse_double(f2, "boundaries.csv: f2_hz");
    }
  }
  const fs::path spectra = fs::path(analysis_dir) / "spectra";
  if (!fs::is_directory(spectra)) throw Error("not-found", "missing spectra/ in " + analysis_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(spectra)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    const GgcSpectrum g = read_spectrum_csv(f.string());
    const std::string dyad_id = f.stem().string();
    plot_dyad((fs::path(out_dir) / (dyad_id + ".svg")).string(), dyad_id, g, thr, b);
  }
}

// ---------------------------------------------------------------- drivers

void run_simulate(const SimConfig& base, int n_trials, const std::string& out_dir) {
  if (n_trials < 0) throw Error("config-error", "trial count must be >= 0");
  if (base.n_dyads < 1) throw Error("config-error", "n_dyads must be >= 1");
  fs::create_directories(out_dir);
  SessionManifest manifest;
  manifest.fs_hz = base.fs_hz;
  std::ofstream truth(fs::path(out_dir) / "ground_truth.txt");
  if (!truth) throw Error("not-found", "cannot write ground_truth.txt");
  truth << "base_seed = " << base.seed << "\n";
  truth << "n_dyads = " << base.n_dyads << "\n";
  truth << "trials_per_dyad = " << n_trials << "\n";
  for (int d = 0; d < base.n_dyads; ++d) {
    char dyad_id[32];
    std::snprintf(dyad_id, sizeof(dyad_id), "dyad%02d", d + 1);
    DyadConfig dc;
    dc.dyad_id = dyad_id;
    dc.masses = base.masses;
    dc.role_a = "synch";
    dc.role_b = "target";
    manifest.dyads.push_back(dc);
    for (int t = 0; t < n_trials; ++t) {
      SimConfig cfg = base;
      cfg.seed = base.seed + static_cast<uint64_t>(d) * static_cast<uint64_t>(n_trials) +
                 static_cast<uint64_t>(t);
      SimTrial st = simulate(cfg);
      char trial_id[48];
      std::snprintf(trial_id, sizeof(trial_id), "%s_t%02d", dyad_id, t + 1);
      st.trial.trial_id = trial_id;
      st.trial.dyad_id = dyad_id;
      const std::string file = std::string(trial_id) + ".csv";
      write_trial_csv((fs::path(out_dir) / file).string(), st.trial);
      SessionManifest::TrialEntry entry;
      entry.trial_id = trial_id;
      entry.dyad_id = dyad_id;
      entry.file = file;
      entry.target_distance_m = st.trial.condition.target_distance_m;
      entry.metronome_period_s = st.trial.condition.metronome_period_s;
      manifest.trials.push_back(entry);
      truth << "truth." << trial_id << ".seed = " << cfg.seed << "\n";
      truth << "truth." << trial_id << ".direction = " << to_string(st.truth.direction) << "\n";
      truth << "truth." << trial_id << ".band_lo_hz = " << format_double(st.truth.band_lo_hz)
            << "\n";
      truth << "truth." << trial_id << ".band_hi_hz = " << format_double(st.truth.band_hi_hz)
            << "\n";
      truth << "truth." << trial_id << ".gain = " << format_double(st.truth.gain) << "\n";
    }
  }
  write_session_manifest((fs::path(out_dir) / "session.manifest").string(), manifest);
}

SimConfig read_sim_config(const std::string& path) {
  SimConfig c;
  for (const auto& [key, value] : read_kv_file(path)) {
    const std::string ctx = path + ": " + key;
    if (key == "movement_freq_hz") {
      c.movement_freq_hz = parse_double(value, ctx);
    } else if (key == "movement_amp_n") {
      c.movement_amp_n = parse_double(value, ctx);
    } else if (key == "coupling_gain") {
      c.coupling_gain = parse_double(value, ctx);
    } else if (key == "coupling_band_lo_hz") {
      c.coupling_band_lo_hz = parse_double(value, ctx);
    } else if (key == "coupling_band_hi_hz") {
      c.coupling_band_hi_hz = parse_double(value, ctx);
    } else if (key == "coupling_delay_s") {
      c.coupling_delay_s = parse_double(value, ctx);
    } else if (key == "direction") {
      c.direction = coupling_direction_from_string(value);
    } else if (key == "noise_sd_a_n") {
      c.noise_sd_a_n = parse_double(value, ctx);
    } else if (key == "noise_sd_b_n") {
      c.noise_sd_b_n = parse_double(value, ctx);
    } else if (key == "role_amp_ratio") {
      c.role_amp_ratio = parse_double(value, ctx);
    } else if (key == "phase_jitter_sd_rad") {
      c.phase_jitter_sd_rad = parse_double(value, ctx);
    } else if (key == "m1_kg") {
      c.masses.m1 = parse_double(value, ctx);
    } else if (key == "m2_kg") {
      c.masses.m2 = parse_double(value, ctx);
    } else if (key == "M_kg") {
      c.masses.M = parse_double(value, ctx);
    } else if (key == "fs_hz") {
      c.fs_hz = parse_double(value, ctx);
    } else if (key == "duration_s") {
      c.duration_s = parse_double(value, ctx);
    } else if (key == "silence_s") {
      c.silence_s = parse_double(value, ctx);
    } else if (key == "seed") {
      try {
        c.seed = std::stoull(value);
      } catch (const std::exception&) {
        throw Error("config-error", ctx + ": seed must be an unsigned integer");
      }
    } else if (key == "n_dyads") {
      c.n_dyads = static_cast<int>(parse_double(value, ctx));
    } else {
      throw Error("config-error", path + ": unknown key '" + key + "'");
    }
  }
  return c;
}

void write_sim_config(const std::string& path, const SimConfig& c) {
  std::ofstream out(path);
  if (!out) throw Error("not-found", "cannot write " + path);
  out << "movement_freq_hz = " << format_double(c.movement_freq_hz) << "\n";
  out << "movement_amp_n = " << format_double(c.movement_amp_n) << "\n";
  out << "coupling_gain = " << format_double(c.coupling_gain) << "\n";
  out << "coupling_band_lo_hz = " << format_double(c.coupling_band_lo_hz) << "\n";
  out << "coupling_band_hi_hz = " << format_double(c.coupling_band_hi_hz) << "\n";
  out << "coupling_delay_s = " << format_double(c.coupling_delay_s) << "\n";
  out << "direction = " << to_string(c.direction) << "\n";
  out << "noise_sd_a_n = " << format_double(c.noise_sd_a_n) << "\n";
  out << "noise_sd_b_n = " << format_double(c.noise_sd_b_n) << "\n";
  out << "role_amp_ratio = " << format_double(c.role_amp_ratio) << "\n";
  out << "phase_jitter_sd_rad = " << format_double(c.phase_jitter_sd_rad) << "\n";
  out << "m1_kg = " << format_double(c.masses.m1) << "\n";
  out << "m2_kg = " << format_double(c.masses.m2) << "\n";
  out << "M_kg = " << format_double(c.masses.M) << "\n";
  out << "fs_hz = " << format_double(c.fs_hz) << "\n";
  out << "duration_s = " << format_double(c.duration_s) << "\n";
  out << "silence_s = " << format_double(c.silence_s) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "n_dyads = " << c.n_dyads << "\n";
}

ThresholdCurve run_surrogate(const std::string& input_dir, int n_perm, uint64_t seed,
                             const PipelineConfig& cfg) {
  const std::string manifest_path = (fs::path(input_dir) / "session.manifest").string();
  const SessionManifest manifest = read_session_manifest(manifest_path);
  const std::vector<TrialRecord> trials = load_session(manifest_path);
  std::optional<std::vector<SegmentRow>> table_cache;
  std::map<std::string, DyadMasses> dyads;
  for (const auto& d : manifest.dyads) dyads[d.dyad_id] = resolve_masses(d, cfg, table_cache);
  std::map<std::string, std::pair<std::vector<Epoch>, std::vector<Epoch>>> by_dyad;
  for (const TrialRecord& t : trials) {
    const auto eps = preprocess_trial(t, dyads.at(t.dyad_id), cfg);
    auto& [ea, eb] = by_dyad[t.dyad_id];
    for (const EpochPair& ep : eps) {
      ea.push_back(ep.a);
      eb.push_back(ep.b);
    }
  }
  std::vector<IndividualSeries> pool;
  for (auto& [dyad_id, eps] : by_dyad) {
    pool.push_back({dyad_id + ":a", dyad_id, std::move(eps.first)});
    pool.push_back({dyad_id + ":b", dyad_id, std::move(eps.second)});
  }
  const GgcOptions ggc_opt{cfg.p_max, cfg.fixed_p, cfg.freq_step_hz};
  const SurrogateEnsemble ens = surrogate_ensemble(std::move(pool), n_perm, seed, ggc_opt);
  if (ens.n_skipped > 0) {
    std::fprintf(stderr, "warning: %d unstable surrogate draw(s) skipped and redrawn\n",
                 ens.n_skipped);
  }
  ThresholdCurve thr = threshold_from_ensemble(ens);
  const double nyq = cfg.downsample_fs_hz / 2.0;
  const double fmax = cfg.freq_max_hz > 0.0 ? std::min(cfg.freq_max_hz, nyq) : nyq;
  truncate_curve(thr.freqs, thr.q99, fmax);
  return thr;
}

}  // namespace dyadflow
