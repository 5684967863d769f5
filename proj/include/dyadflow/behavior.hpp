#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyadflow/signal.hpp"
#include "dyadflow/trial.hpp"

namespace dyadflow {

struct Reversal {
  double time_s = 0.0;
  double position_m = 0.0;
  bool is_max = true;
};

// Movement reversal points: alternating position extrema from the shared
// extrema detector. min_prominence in meters.
std::vector<Reversal> reversal_points(const Channel& position, double min_prominence);

struct ErrorStats {
  double mean = 0.0;  // percent
  double sd = 0.0;    // percent, n-1 convention (0 when n == 1)
  int n = 0;
};

// Position Error: per reversal, |reversal position - nearest target center|,
// expressed as 100 * value / normalizer. Throws no-data without reversals.
ErrorStats position_error(const std::vector<Reversal>& reversals, double center_left_m,
                          double center_right_m, double normalizer_m);

// Synchronization Error: movement periods (successive reversal-time
// differences, one target-to-target leg each) minus the metronome beat
// period, as a percentage of that period. Throws no-data with < 2 reversals.
ErrorStats synchronization_error(const std::vector<double>& reversal_times_s,
                                 double metronome_period_s);

struct PerformanceSummary {
  std::string dyad_id;
  std::string trial_id;
  ErrorStats pe;
  ErrorStats se;
};

struct PerformanceOptions {
  double reversal_prominence_fraction = 0.05;  // of position peak-to-peak
  // Normalizer for PE: inter-target distance by default; a fixed target
  // width (m) can be supplied instead.
  std::optional<double> normalizer_m;
};

// Full per-trial evaluation: detect reversals, drop those before the first
// beat from SE (pre-metronome silence), and compute PE/SE against the
// trial's condition.
PerformanceSummary trial_performance(const TrialRecord& trial, const PerformanceOptions& opt);

// Per-dyad error summary feeding the exclusion rule.
struct DyadErrorSummary {
  std::string dyad_id;
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};

struct ExclusionOutcome {
  std::vector<std::string> excluded;  // dyad ids, input order
  std::vector<std::string> log;       // one reason line per exclusion
  double pooled_sd = 0.0;             // sd of the whole sample's errors
};

// Excludes dyads whose error sd >= 2 x the whole-sample error sd. The
// whole-sample sd is reconstructed from the per-dyad summaries:
//   SS = sum_d[(n_d - 1) sd_d^2 + n_d (mean_d - grand_mean)^2],  sd = sqrt(SS / (N - 1)).
// Flags are a pure function of the full input list, so reapplying the filter
// to the same list (regardless of prior flags) returns identical output.
ExclusionOutcome exclusion_filter(const std::vector<DyadErrorSummary>& dyads);

// Force summaries for one dyad-trial: mean |F| per participant and the
// frequency-content histogram of each reconstructed force channel.
struct ForceSummary {
  double mean_abs_f1 = 0.0;
  double mean_abs_f2 = 0.0;
  PeriodHistogram hist_f1;
  PeriodHistogram hist_f2;
};
ForceSummary force_summaries(const Channel& f1, const Channel& f2,
                             double prominence_fraction = 0.05);

}  // namespace dyadflow
