#pragma once

#include <span>
#include <vector>

#include "dyadflow/channel.hpp"

namespace dyadflow {

// Detected local extremum. `prominence` follows the usual definition: height
// above the highest of the two base valleys, where each base is the minimum
// between the peak and the nearest sample that exceeds it (or the border).
struct PeakPoint {
  int index = 0;
  double value = 0.0;
  bool is_max = true;
  double prominence = 0.0;
};

// Plateau-aware local maxima and minima with prominence >= min_prominence,
// merged and sorted by index. A plateau counts once, at its middle sample.
std::vector<PeakPoint> find_extrema(std::span<const double> x, double min_prominence);

// Frequencies of detected oscillation periods (one entry per period between
// consecutive same-type extrema) plus a fixed-width histogram of them.
struct PeriodHistogram {
  std::vector<double> frequencies;  // Hz
  std::vector<double> bin_edges;    // size counts.size() + 1
  std::vector<int> counts;
};

// Zero-phase low-pass: order-n digital Butterworth applied forward and
// backward (effective magnitude = single-pass magnitude squared). The input
// is extended by 3*order reflected samples per end before filtering.
Channel butterworth_lowpass_dualpass(const Channel& x, double fc_hz, int order);

// Zero-phase high-pass counterpart (shared pole machinery, zeros at DC).
Channel butterworth_highpass_dualpass(const Channel& x, double fc_hz, int order);

// High-pass at f_lo then low-pass at f_hi, both dual pass.
Channel bandpass_dualpass(const Channel& x, double f_lo_hz, double f_hi_hz, int order);

// Keep every (fs/target_fs)-th sample starting at sample 0. The ratio must be
// an integer; the caller is responsible for prior low-pass filtering.
Channel decimate(const Channel& x, double target_fs);

// k consecutive windows of floor(n/k) samples; the trailing remainder is
// dropped so the trial onset stays aligned.
std::vector<Epoch> epoch_split(const Channel& x, int k, const std::string& parent_trial = {});

PeriodHistogram extrema_periods(const Channel& x, double min_prominence,
                                double bin_width_hz = 0.25);

// Frequency of the largest-magnitude DFT bin after mean removal (0 Hz bin
// excluded). Throws no-peak when the spectrum is identically zero.
double dominant_frequency(const Channel& x);

}  // namespace dyadflow
