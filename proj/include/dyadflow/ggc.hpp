#pragma once

#include <string>
#include <vector>

#include "dyadflow/spectral.hpp"

namespace dyadflow {

// Directional frequency-domain Granger influence curves on a shared grid.
// a_to_b is the influence of channel 0 on channel 1 and vice versa.
struct GgcSpectrum {
  std::vector<double> freqs;
  std::vector<double> a_to_b;
  std::vector<double> b_to_a;
};

// Geweke's frequency-domain measure from a spectral decomposition:
//   I_{B->A}(f) = -ln(1 - (Sigma_BB - Sigma_AB^2/Sigma_AA) |H_AB(f)|^2 / S_AA(f))
// and symmetrically for A->B. Arguments outside [0, 1) by more than 1e-12
// raise numeric-domain-error (reported with the frequency); smaller
// excursions are clipped.
GgcSpectrum ggc_spectrum(const SpectralDecomposition& d);

// End-to-end parametric curve: fit VAR (order selected up to p_max unless
// fixed_p > 0), then ggc_spectrum over the grid 0..fs/2 step freq_step.
struct GgcOptions {
  int p_max = 20;
  int fixed_p = 0;  // 0 = select by AIC
  double freq_step_hz = 0.05;
};
struct GgcResult {
  GgcSpectrum spectrum;
  VarModel model;
};
GgcResult ggc_from_epochs(const std::vector<EpochPair>& epochs, const GgcOptions& opt);

// Trapezoidal integral of one curve over [f_lo, f_hi]; band edges between
// grid points contribute linearly interpolated endpoint values.
double band_integral(const std::vector<double>& freqs, const std::vector<double>& curve,
                     double f_lo, double f_hi);

// Band-integrated influence per direction and their difference.
struct BandInfluence {
  std::string name;  // "low" ([0, f1]) or "high" ([f1, f2])
  double f_lo = 0.0;
  double f_hi = 0.0;
  double integral_ab = 0.0;
  double integral_ba = 0.0;
  double delta = 0.0;  // integral_ab - integral_ba
};

struct BandBoundaries {
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  bool f2_capped = false;                 // rule never fired; capped at grid max
  std::vector<std::string> missing_peak;  // participants excluded from f1
};

// BandInfluence over [0, f1] and [f1, f2].
std::vector<BandInfluence> delta_influence(const GgcSpectrum& g, const BandBoundaries& b);

struct BandBoundariesOptions {
  double min_peak_freq_hz = 0.1;
  double peak_prominence_fraction = 0.10;  // of the curve's global max
  int persistence_bins = 3;                // consecutive sub-threshold bins for f2
};

// The two-step boundary procedure:
//   f1 = mean + 3*sd (n-1) over participants of each outgoing curve's first
//        local peak frequency; peakless participants are excluded and logged.
//   f2 = lowest grid frequency above f1 where mean + 3*sd of the designated
//        curves stays below the threshold for persistence_bins consecutive
//        bins; if never, the grid maximum with f2_capped set.
// designated_direction per spectrum: 0 = a_to_b defines f2, 1 = b_to_a,
// -1 = pick the direction with the larger full-grid integral.
BandBoundaries band_boundaries(const std::vector<GgcSpectrum>& spectra,
                               const std::vector<int>& designated_direction,
                               const std::vector<double>& threshold_q99,
                               const BandBoundariesOptions& opt = {},
                               const std::vector<std::string>& dyad_ids = {});

// Time-domain Geweke statistic recovered from a curve:
// (2/fs) * trapezoidal integral of I(f) over the full grid.
double geweke_time_domain(const std::vector<double>& freqs, const std::vector<double>& curve,
                          double fs);

}  // namespace dyadflow
