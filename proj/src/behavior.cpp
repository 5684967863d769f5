#include "dyadflow/behavior.hpp"

#include <algorithm>
#include <cmath>

namespace dyadflow {

namespace {

ErrorStats stats_percent(const std::vector<double>& errors, double scale) {
  ErrorStats s;
  s.n = static_cast<int>(errors.size());
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= static_cast<double>(errors.size());
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  s.mean = 100.0 * mean / scale;
  s.sd = errors.size() > 1
             ? 100.0 * std::sqrt(ss / static_cast<double>(errors.size() - 1)) / scale
             : 0.0;
  return s;
}

double peak_to_peak(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace

std::vector<Reversal> reversal_points(const Channel& position, double min_prominence) {
  validate_channel(position);
  std::vector<Reversal> out;
  for (const PeakPoint& p : find_extrema(position.samples, min_prominence)) {
    out.push_back({static_cast<double>(p.index) / position.fs, p.value, p.is_max});
  }
  return out;
}

ErrorStats position_error(const std::vector<Reversal>& reversals, double center_left_m,
                          double center_right_m, double normalizer_m) {
  if (reversals.empty()) throw Error("no-data", "no reversals for position error");
  if (normalizer_m <= 0.0) throw Error("config-error", "PE normalizer must be positive");
  std::vector<double> errors;
  errors.reserve(reversals.size());
  for (const Reversal& r : reversals) {
    const double to_left = std::abs(r.position_m - center_left_m);
    const double to_right = std::abs(r.position_m - center_right_m);
    errors.push_back(std::min(to_left, to_right));
  }
  return stats_percent(errors, normalizer_m);
}

ErrorStats synchronization_error(const std::vector<double>& reversal_times_s,
                                 double metronome_period_s) {
  if (reversal_times_s.size() < 2) throw Error("no-data", "need >= 2 reversals for SE");
  if (metronome_period_s <= 0.0) throw Error("config-error", "metronome period must be positive");
  std::vector<double> errors;
  errors.reserve(reversal_times_s.size() - 1);
  for (size_t i = 0; i + 1 < reversal_times_s.size(); ++i) {
    errors.push_back(reversal_times_s[i + 1] - reversal_times_s[i] - metronome_period_s);
  }
  return stats_percent(errors, metronome_period_s);
}

PerformanceSummary trial_performance(const TrialRecord& trial, const PerformanceOptions& opt) {
  if (trial.position.samples.empty()) throw Error("no-data", "trial has no position channel");
  const double p2p = peak_to_peak(trial.position.samples);
  const auto reversals =
      reversal_points(trial.position, opt.reversal_prominence_fraction * p2p);

  // Target centers sit symmetrically about the position mean (PE is then
  // invariant to a common shift of trace and targets).
  double pos_mean = 0.0;
  for (double v : trial.position.samples) pos_mean += v;
  pos_mean /= static_cast<double>(trial.position.samples.size());
  const double half = trial.condition.target_distance_m / 2.0;
  const double normalizer =
      opt.normalizer_m ? *opt.normalizer_m : trial.condition.target_distance_m;

  PerformanceSummary s;
  s.dyad_id = trial.dyad_id;
  s.trial_id = trial.trial_id;
  s.pe = position_error(reversals, pos_mean - half, pos_mean + half, normalizer);

  // SE ignores movement before the metronome starts.
  const double t0 = trial.beats.empty() ? 0.0 : trial.beats.front();
  std::vector<double> times;
  for (const Reversal& r : reversals) {
    if (r.time_s >= t0) times.push_back(r.time_s);
  }
  s.se = synchronization_error(times, trial.condition.metronome_period_s);
  return s;
}

ExclusionOutcome exclusion_filter(const std::vector<DyadErrorSummary>& dyads) {
  if (dyads.size() < 3) throw Error("insufficient-pool", "exclusion rule needs >= 3 dyads");
  double total_n = 0.0, grand = 0.0;
  for (const auto& d : dyads) {
    if (d.n < 1 || d.sd < 0.0) throw Error("config-error", "bad dyad error summary");
    total_n += static_cast<double>(d.n);
    grand += static_cast<double>(d.n) * d.mean;
  }
  grand /= total_n;
  double ss = 0.0;
  for (const auto& d : dyads) {
    const double nd = static_cast<double>(d.n);
    ss += (nd - 1.0) * d.sd * d.sd + nd * (d.mean - grand) * (d.mean - grand);
  }
  ExclusionOutcome out;
  out.pooled_sd = std::sqrt(ss / (total_n - 1.0));
  for (const auto& d : dyads) {
    if (d.sd >= 2.0 * out.pooled_sd) {
      out.excluded.push_back(d.dyad_id);
      out.log.push_back("dyad " + d.dyad_id + " excluded: error sd " + std::to_string(d.sd) +
                        " >= 2 x sample sd " + std::to_string(out.pooled_sd));
    }
  }
  return out;
}

ForceSummary force_summaries(const Channel& f1, const Channel& f2, double prominence_fraction) {
  ForceSummary s;
  double acc = 0.0;
  for (double v : f1.samples) acc += std::abs(v);
  s.mean_abs_f1 = f1.samples.empty() ? 0.0 : acc / static_cast<double>(f1.samples.size());
  acc = 0.0;
  for (double v : f2.samples) acc += std::abs(v);
  s.mean_abs_f2 = f2.samples.empty() ? 0.0 : acc / static_cast<double>(f2.samples.size());
  if (!f1.samples.empty()) {
    s.hist_f1 = extrema_periods(f1, prominence_fraction * peak_to_peak(f1.samples));
  }
  if (!f2.samples.empty()) {
    s.hist_f2 = extrema_periods(f2, prominence_fraction * peak_to_peak(f2.samples));
  }
  return s;
}

}  // namespace dyadflow
