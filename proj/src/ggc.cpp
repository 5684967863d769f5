#include "dyadflow/ggc.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "dyadflow/signal.hpp"

namespace dyadflow {

namespace {

// Eq.-4 argument with guards: tiny excursions outside [0, 1) are rounding,
// anything further is a real numeric failure worth surfacing.
double guarded_ln_argument(double q, double freq) {
  if (q > 1.0 + 1e-9 || q < -1e-9) {
    throw Error("numeric-domain-error", "ln argument " + std::to_string(1.0 - q) +
                                            " out of range at " + std::to_string(freq) + " Hz");
  }
  if (q > 1.0 - 1e-12) q = 1.0 - 1e-12;
  if (q < 0.0) q = 0.0;
  return q;
}

}  // namespace

GgcSpectrum ggc_spectrum(const SpectralDecomposition& d) {
  const size_t n = d.freqs.size();
  if (n == 0 || d.S.size() != n || d.H.size() != n) {
    throw Error("grid-error", "decomposition arrays must share the grid length");
  }
  const double s_aa = d.sigma(0, 0);
  const double s_bb = d.sigma(1, 1);
  const double s_ab = d.sigma(0, 1);
  if (s_aa <= 0.0 || s_bb <= 0.0) {
    throw Error("invalid-covariance", "innovation variances must be positive");
  }
  // Partial innovation variances: what the source channel's innovations
  // contribute after regressing out the target channel's innovations.
  const double corrected_b = s_bb - s_ab * s_ab / s_aa;  // B's share, feeds B->A
  const double corrected_a = s_aa - s_ab * s_ab / s_bb;  // A's share, feeds A->B

  GgcSpectrum g;
  g.freqs = d.freqs;
  g.a_to_b.resize(n);
  g.b_to_a.resize(n);
  for (size_t j = 0; j < n; ++j) {
    const double spec_aa = d.S[j](0, 0).real();
    const double spec_bb = d.S[j](1, 1).real();
    if (spec_aa <= 0.0 || spec_bb <= 0.0) {
      throw Error("numeric-domain-error",
                  "nonpositive power spectrum at " + std::to_string(d.freqs[j]) + " Hz");
    }
    const double h_ab2 = std::norm(d.H[j](0, 1));
    const double h_ba2 = std::norm(d.H[j](1, 0));
    const double q_ba = guarded_ln_argument(corrected_b * h_ab2 / spec_aa, d.freqs[j]);
    const double q_ab = guarded_ln_argument(corrected_a * h_ba2 / spec_bb, d.freqs[j]);
    g.b_to_a[j] = -std::log1p(-q_ba);
    g.a_to_b[j] = -std::log1p(-q_ab);
  }
  return g;
}

GgcResult ggc_from_epochs(const std::vector<EpochPair>& epochs, const GgcOptions& opt) {
  if (epochs.empty()) throw Error("insufficient-samples", "no epochs");
  const int order = opt.fixed_p > 0 ? opt.fixed_p : select_order(epochs, opt.p_max);
  GgcResult r;
  r.model = fit_var(epochs, order);
  const auto freqs = frequency_grid(r.model.fs, opt.freq_step_hz);
  r.spectrum = ggc_spectrum(var_to_spectral(r.model, freqs));
  return r;
}

namespace {

double interp_at(const std::vector<double>& freqs, const std::vector<double>& curve, double f) {
  const auto it = std::lower_bound(freqs.begin(), freqs.end(), f);
  const size_t hi = static_cast<size_t>(it - freqs.begin());
  if (hi == 0) return curve.front();
  if (hi >= freqs.size()) return curve.back();
  const size_t lo = hi - 1;
  const double span = freqs[hi] - freqs[lo];
  const double w = span > 0.0 ? (f - freqs[lo]) / span : 0.0;
  return curve[lo] * (1.0 - w) + curve[hi] * w;
}

}  // namespace

double band_integral(const std::vector<double>& freqs, const std::vector<double>& curve,
                     double f_lo, double f_hi) {
  if (freqs.size() != curve.size() || freqs.size() < 2) {
    throw Error("grid-error", "curve and grid must match with >= 2 points");
  }
  if (!(f_lo < f_hi)) throw Error("invalid-band", "band must satisfy f_lo < f_hi");
  if (f_lo < freqs.front() - 1e-9 || f_hi > freqs.back() + 1e-9) {
    throw Error("invalid-band", "band [" + std::to_string(f_lo) + ", " + std::to_string(f_hi) +
                                    "] outside grid range");
  }
  f_lo = std::max(f_lo, freqs.front());
  f_hi = std::min(f_hi, freqs.back());
  // Integration nodes: interpolated band edges plus interior grid points.
  std::vector<double> xs{f_lo};
  std::vector<double> ys{interp_at(freqs, curve, f_lo)};
  for (size_t j = 0; j < freqs.size(); ++j) {
    if (freqs[j] > f_lo && freqs[j] < f_hi) {
      xs.push_back(freqs[j]);
      ys.push_back(curve[j]);
    }
  }
  xs.push_back(f_hi);
  ys.push_back(interp_at(freqs, curve, f_hi));
  double acc = 0.0;
  for (size_t j = 0; j + 1 < xs.size(); ++j) {
    acc += 0.5 * (ys[j] + ys[j + 1]) * (xs[j + 1] - xs[j]);
  }
  return acc;
}

std::vector<BandInfluence> delta_influence(const GgcSpectrum& g, const BandBoundaries& b) {
  if (!(0.0 < b.f1_hz && b.f1_hz < b.f2_hz)) {
    throw Error("invalid-band", "boundaries must satisfy 0 < f1 < f2");
  }
  std::vector<BandInfluence> out;
  const double lows[2][2] = {{g.freqs.front(), b.f1_hz}, {b.f1_hz, b.f2_hz}};
  const char* names[2] = {"low", "high"};
  for (int i = 0; i < 2; ++i) {
    BandInfluence bi;
    bi.name = names[i];
    bi.f_lo = lows[i][0];
    bi.f_hi = lows[i][1];
    bi.integral_ab = band_integral(g.freqs, g.a_to_b, bi.f_lo, bi.f_hi);
    bi.integral_ba = band_integral(g.freqs, g.b_to_a, bi.f_lo, bi.f_hi);
    bi.delta = bi.integral_ab - bi.integral_ba;
    out.push_back(std::move(bi));
  }
  return out;
}

namespace {

// First local maximum at or above min_freq whose prominence reaches the
// fraction of the curve's global maximum; nullopt when none qualifies.
std::optional<double> first_peak_freq(const std::vector<double>& freqs,
                                      const std::vector<double>& curve, double min_freq,
                                      double prominence_fraction) {
  const double global_max = *std::max_element(curve.begin(), curve.end());
  if (global_max <= 0.0) return std::nullopt;
  for (const PeakPoint& p : find_extrema(curve, prominence_fraction * global_max)) {
    if (p.is_max && freqs[static_cast<size_t>(p.index)] >= min_freq) {
      return freqs[static_cast<size_t>(p.index)];
    }
  }
  return std::nullopt;
}

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  sd = 0.0;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
}

}  // namespace

BandBoundaries band_boundaries(const std::vector<GgcSpectrum>& spectra,
                               const std::vector<int>& designated_direction,
                               const std::vector<double>& threshold_q99,
                               const BandBoundariesOptions& opt,
                               const std::vector<std::string>& dyad_ids) {
  if (spectra.size() < 2) throw Error("insufficient-pool", "band boundaries need >= 2 dyads");
  if (designated_direction.size() != spectra.size()) {
    throw Error("grid-error", "one designated direction per spectrum required");
  }
  const std::vector<double>& freqs = spectra.front().freqs;
  if (threshold_q99.size() != freqs.size()) {
    throw Error("grid-error", "threshold grid does not match spectra grid");
  }
  for (const auto& s : spectra) {
    if (s.freqs != freqs) throw Error("grid-error", "spectra must share one grid");
  }

  BandBoundaries b;
  std::vector<double> peak_freqs;
  for (size_t i = 0; i < spectra.size(); ++i) {
    const std::string id = i < dyad_ids.size() ? dyad_ids[i] : "dyad" + std::to_string(i);
    const std::vector<double>* curves[2] = {&spectra[i].a_to_b, &spectra[i].b_to_a};
    const char* tags[2] = {":a", ":b"};
    for (int c = 0; c < 2; ++c) {
      const auto pf =
          first_peak_freq(freqs, *curves[c], opt.min_peak_freq_hz, opt.peak_prominence_fraction);
      if (pf) {
        peak_freqs.push_back(*pf);
      } else {
        b.missing_peak.push_back(id + tags[c]);
      }
    }
  }
  if (peak_freqs.empty()) {
    throw Error("missing-peak", "no participant curve has a qualifying first peak");
  }
  double mean = 0.0, sd = 0.0;
  mean_sd(peak_freqs, mean, sd);
  b.f1_hz = mean + 3.0 * sd;
  if (b.f1_hz >= freqs.back()) {
    throw Error("invalid-band", "f1 = " + std::to_string(b.f1_hz) + " Hz reaches the grid end");
  }

  // Designated curve per dyad, then the first persistent sub-threshold run
  // of their mean + 3*sd above f1.
  std::vector<const std::vector<double>*> designated;
  for (size_t i = 0; i < spectra.size(); ++i) {
    int dir = designated_direction[i];
    if (dir == -1) {
      const double ab =
          band_integral(freqs, spectra[i].a_to_b, freqs.front(), freqs.back());
      const double ba =
          band_integral(freqs, spectra[i].b_to_a, freqs.front(), freqs.back());
      dir = ab >= ba ? 0 : 1;
    }
    designated.push_back(dir == 0 ? &spectra[i].a_to_b : &spectra[i].b_to_a);
  }
  std::vector<double> level(freqs.size());
  std::vector<double> vals(designated.size());
  for (size_t j = 0; j < freqs.size(); ++j) {
    for (size_t i = 0; i < designated.size(); ++i) vals[i] = (*designated[i])[j];
    mean_sd(vals, mean, sd);
    level[j] = mean + 3.0 * sd;
  }
  b.f2_hz = freqs.back();
  b.f2_capped = true;
  const size_t need = static_cast<size_t>(std::max(1, opt.persistence_bins));
  for (size_t j = 0; j < freqs.size(); ++j) {
    if (freqs[j] <= b.f1_hz) continue;
    if (j + need > freqs.size()) break;
    bool run = true;
    for (size_t k = 0; k < need && run; ++k) run = level[j + k] < threshold_q99[j + k];
    if (run) {
      b.f2_hz = freqs[j];
      b.f2_capped = false;
      break;
    }
  }
  return b;
}

double geweke_time_domain(const std::vector<double>& freqs, const std::vector<double>& curve,
                          double fs) {
  return 2.0 / fs * band_integral(freqs, curve, freqs.front(), freqs.back());
}

}  // namespace dyadflow
