#include "dyadflow/signal.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace dyadflow {

namespace {

// One second-order (or degenerate first-order: b2 = a2 = 0) filter section.
struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Bilinear-transform Butterworth as cascaded sections. The analog prototype
// poles exp(i*(pi/2 + (2k+1)*pi/(2n))) are scaled by the prewarped cutoff
// w = tan(pi*fc/fs) and mapped with s = (1 - z^-1)/(1 + z^-1), so the -3 dB
// point lands exactly on fc.
std::vector<Biquad> design_butterworth(double fc, double fs, int order, bool highpass) {
  const double w = std::tan(std::numbers::pi * fc / fs);
  std::vector<Biquad> sections;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi / 2.0 +
                         std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    const double a = -2.0 * std::cos(theta) * w;  // 2*alpha*w, alpha > 0
    const double b = w * w;
    const double d0 = 1.0 + a + b;
    Biquad s;
    s.a1 = 2.0 * (b - 1.0) / d0;
    s.a2 = (1.0 - a + b) / d0;
    if (highpass) {
      s.b0 = 1.0 / d0;
      s.b1 = -2.0 / d0;
      s.b2 = 1.0 / d0;
    } else {
      s.b0 = b / d0;
      s.b1 = 2.0 * b / d0;
      s.b2 = b / d0;
    }
    sections.push_back(s);
  }
  if (order % 2 == 1) {  // real pole at -w
    Biquad s;
    s.a1 = (w - 1.0) / (1.0 + w);
    if (highpass) {
      s.b0 = 1.0 / (1.0 + w);
      s.b1 = -1.0 / (1.0 + w);
    } else {
      s.b0 = w / (1.0 + w);
      s.b1 = w / (1.0 + w);
    }
    sections.push_back(s);
  }
  return sections;
}

// Transposed direct form II with the state preloaded to the steady-state
// response for a constant input equal to the first sample, so constant
// signals pass through bit-exactly and edge transients vanish.
void filter_in_place(std::vector<double>& x, const std::vector<Biquad>& sections) {
  for (const Biquad& s : sections) {
    const double u0 = x.empty() ? 0.0 : x.front();
    const double h1 = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);  // DC gain
    double z1 = (h1 - s.b0) * u0;
    double z2 = (s.b2 - s.a2 * h1) * u0;
    for (double& v : x) {
      const double y = s.b0 * v + z1;
      z1 = s.b1 * v - s.a1 * y + z2;
      z2 = s.b2 * v - s.a2 * y;
      v = y;
    }
  }
}

Channel dualpass(const Channel& x, double fc, int order, bool highpass) {
  validate_channel(x);
  if (order < 1) throw Error("invalid-order", "filter order must be >= 1");
  if (fc <= 0.0 || fc >= x.fs / 2.0) {
    throw Error("invalid-cutoff", "cutoff " + std::to_string(fc) + " Hz outside (0, " +
                                      std::to_string(x.fs / 2.0) + ") for fs " +
                                      std::to_string(x.fs));
  }
  const size_t npad = static_cast<size_t>(3 * order);
  if (x.samples.size() <= npad) {
    throw Error("insufficient-samples", "need more than " + std::to_string(npad) +
                                            " samples, got " + std::to_string(x.samples.size()));
  }
  const auto& in = x.samples;
  const size_t n = in.size();
  // Odd (point-symmetric) reflection about the end samples.
  std::vector<double> buf;
  buf.reserve(n + 2 * npad);
  for (size_t i = npad; i >= 1; --i) buf.push_back(2.0 * in.front() - in[i]);
  buf.insert(buf.end(), in.begin(), in.end());
  for (size_t i = 1; i <= npad; ++i) buf.push_back(2.0 * in.back() - in[n - 1 - i]);

  const auto sections = design_butterworth(fc, x.fs, order, highpass);
  filter_in_place(buf, sections);
  std::reverse(buf.begin(), buf.end());
  filter_in_place(buf, sections);
  std::reverse(buf.begin(), buf.end());

  Channel out;
  out.fs = x.fs;
  out.label = x.label;
  out.samples.assign(buf.begin() + npad, buf.begin() + npad + n);
  return out;
}

}  // namespace

Channel butterworth_lowpass_dualpass(const Channel& x, double fc_hz, int order) {
  return dualpass(x, fc_hz, order, /*highpass=*/false);
}

Channel butterworth_highpass_dualpass(const Channel& x, double fc_hz, int order) {
  return dualpass(x, fc_hz, order, /*highpass=*/true);
}

Channel bandpass_dualpass(const Channel& x, double f_lo_hz, double f_hi_hz, int order) {
  if (f_lo_hz >= f_hi_hz) {
    throw Error("invalid-cutoff", "bandpass needs f_lo < f_hi");
  }
  return butterworth_lowpass_dualpass(butterworth_highpass_dualpass(x, f_lo_hz, order), f_hi_hz,
                                      order);
}

Channel decimate(const Channel& x, double target_fs) {
  validate_channel(x);
  if (target_fs <= 0.0) throw Error("invalid-ratio", "target rate must be positive");
  const double ratio = x.fs / target_fs;
  const long r = std::lround(ratio);
  if (r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9) {
    throw Error("invalid-ratio", "fs " + std::to_string(x.fs) + " is not an integer multiple of " +
                                     std::to_string(target_fs));
  }
  Channel out;
  out.fs = target_fs;
  out.label = x.label;
  out.samples.reserve(x.samples.size() / r + 1);
  for (size_t i = 0; i < x.samples.size(); i += static_cast<size_t>(r)) {
    out.samples.push_back(x.samples[i]);
  }
  return out;
}

std::vector<Epoch> epoch_split(const Channel& x, int k, const std::string& parent_trial) {
  validate_channel(x);
  if (k < 1 || static_cast<size_t>(k) > x.samples.size()) {
    throw Error("invalid-split", "cannot split " + std::to_string(x.samples.size()) +
                                     " samples into " + std::to_string(k) + " windows");
  }
  const size_t len = x.samples.size() / static_cast<size_t>(k);
  std::vector<Epoch> out;
  out.reserve(k);
  for (int w = 0; w < k; ++w) {
    Epoch e;
    e.fs = x.fs;
    e.parent_trial = parent_trial;
    e.window_index = w;
    const auto begin = x.samples.begin() + static_cast<long>(w * len);
    e.samples.assign(begin, begin + static_cast<long>(len));
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

// Plateau runs that strictly rise on the left and fall on the right,
// reported at the run's midpoint.
std::vector<int> local_maxima(std::span<const double> x) {
  std::vector<int> peaks;
  const size_t n = x.size();
  size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      size_t ahead = i + 1;
      while (ahead < n - 1 && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back(static_cast<int>((i + ahead - 1) / 2));
        i = ahead;
        continue;
      }
      i = ahead;
    } else {
      ++i;
    }
  }
  return peaks;
}

// Height above the higher of the two base valleys; each base is the minimum
// between the peak and the nearest strictly higher sample (or the border).
double peak_prominence(std::span<const double> x, int peak) {
  const double h = x[peak];
  double left_min = h;
  for (int j = peak - 1; j >= 0; --j) {
    if (x[j] > h) break;
    left_min = std::min(left_min, x[j]);
  }
  double right_min = h;
  for (size_t j = peak + 1; j < x.size(); ++j) {
    if (x[j] > h) break;
    right_min = std::min(right_min, x[j]);
  }
  return h - std::max(left_min, right_min);
}

}  // namespace

std::vector<PeakPoint> find_extrema(std::span<const double> x, double min_prominence) {
  std::vector<PeakPoint> out;
  if (x.size() < 3) return out;
  std::vector<double> neg(x.begin(), x.end());
  for (double& v : neg) v = -v;
  for (int idx : local_maxima(x)) {
    const double prom = peak_prominence(x, idx);
    if (prom >= min_prominence) out.push_back({idx, x[idx], true, prom});
  }
  for (int idx : local_maxima(neg)) {
    const double prom = peak_prominence(neg, idx);
    if (prom >= min_prominence) out.push_back({idx, x[idx], false, prom});
  }
  std::sort(out.begin(), out.end(), [](const PeakPoint& a, const PeakPoint& b) {
    return a.index < b.index;
  });
  return out;
}

PeriodHistogram extrema_periods(const Channel& x, double min_prominence, double bin_width_hz) {
  validate_channel(x);
  PeriodHistogram h;
  if (x.samples.size() < 3) return h;
  const auto extrema = find_extrema(x.samples, min_prominence);
  int last_max = -1;
  int last_min = -1;
  for (const PeakPoint& p : extrema) {
    int& last = p.is_max ? last_max : last_min;
    if (last >= 0) {
      const double period = static_cast<double>(p.index - last) / x.fs;
      h.frequencies.push_back(1.0 / period);
    }
    last = p.index;
  }
  if (h.frequencies.empty()) return h;
  const double fmax = *std::max_element(h.frequencies.begin(), h.frequencies.end());
  const int nbins = std::max(1, static_cast<int>(std::ceil(fmax / bin_width_hz)));
  h.counts.assign(nbins, 0);
  for (int b = 0; b <= nbins; ++b) h.bin_edges.push_back(b * bin_width_hz);
  for (double f : h.frequencies) {
    int b = static_cast<int>(f / bin_width_hz);
    if (b >= nbins) b = nbins - 1;  // value exactly on the top edge
    ++h.counts[b];
  }
  return h;
}

double dominant_frequency(const Channel& x) {
  validate_channel(x);
  const size_t n = x.samples.size();
  if (n < 2) throw Error("insufficient-samples", "dominant_frequency needs >= 2 samples");
  double mean = 0.0;
  for (double v : x.samples) mean += v;
  mean /= static_cast<double>(n);
  std::vector<std::complex<double>> in(n), out(n);
  for (size_t i = 0; i < n; ++i) in[i] = x.samples[i] - mean;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  size_t best = 0;
  double best_mag = 0.0;
  for (size_t k = 1; k <= n / 2; ++k) {
    const double mag = std::abs(out[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  if (best == 0 || best_mag <= 0.0) throw Error("no-peak", "spectrum is identically zero");
  return static_cast<double>(best) * x.fs / static_cast<double>(n);
}

}  // namespace dyadflow
