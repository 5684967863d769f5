#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "dyadflow/rng.hpp"
#include "dyadflow/signal.hpp"
#include "helpers.hpp"

using namespace dyadflow;
using std::numbers::pi;

namespace {

Channel sine(double freq_hz, double amp, double fs, double seconds, double phase = 0.0) {
  const size_t n = static_cast<size_t>(seconds * fs);
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) {
    v[i] = amp * std::sin(2.0 * pi * freq_hz * static_cast<double>(i) / fs + phase);
  }
  return make_channel(std::move(v), fs);
}

// Peak-to-peak amplitude over the middle third (clear of any edge effects).
double mid_amplitude(const Channel& x) {
  const size_t n = x.samples.size();
  double lo = x.samples[n / 3], hi = lo;
  for (size_t i = n / 3; i < 2 * n / 3; ++i) {
    lo = std::min(lo, x.samples[i]);
    hi = std::max(hi, x.samples[i]);
  }
  return (hi - lo) / 2.0;
}

}  // namespace

TEST_CASE("lowpass dual pass: DC gain is exactly 1 on constants") {
  Channel x = make_channel(std::vector<double>(500, 3.25), 500.0);
  const Channel y = butterworth_lowpass_dualpass(x, 10.0, 2);
  REQUIRE(y.samples.size() == x.samples.size());
  for (double v : y.samples) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("lowpass dual pass: passband tone amplitude preserved within 1%") {
  const Channel y = butterworth_lowpass_dualpass(sine(1.0, 1.0, 500.0, 10.0), 10.0, 2);
  CHECK(mid_amplitude(y) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("lowpass dual pass: stopband attenuation at 50 Hz") {
  const Channel y = butterworth_lowpass_dualpass(sine(50.0, 1.0, 500.0, 10.0), 10.0, 2);
  const double measured = mid_amplitude(y);
  // True analytic gain of the discretized (bilinear, prewarped-at-fc) filter.
  const double designed = testutil::dualpass_butter_gain(50.0, 10.0, 500.0, 2);
  CHECK(measured == doctest::Approx(designed).epsilon(0.01));
  // The continuous-time formula 1/(1+(f/fc)^{2n}) ignores frequency warping;
  // at f = 0.1*fs it overstates the gain by ~12%, so it only holds loosely
  // here but tightly at lower frequencies (see next check).
  const double analog = 1.0 / (1.0 + std::pow(50.0 / 10.0, 4.0));
  CHECK(measured == doctest::Approx(analog).epsilon(0.15));
}

TEST_CASE("lowpass dual pass: continuous-time magnitude formula holds within 5% at 2*fc") {
  const Channel y = butterworth_lowpass_dualpass(sine(20.0, 1.0, 500.0, 10.0), 10.0, 2);
  const double analog = 1.0 / (1.0 + std::pow(20.0 / 10.0, 4.0));
  CHECK(mid_amplitude(y) == doctest::Approx(analog).epsilon(0.05));
}

TEST_CASE("lowpass dual pass: exactly half power gain at the cutoff") {
  // |H|^2 at fc is 0.5 for any Butterworth order by construction.
  for (int order : {1, 2, 3, 4}) {
    const Channel y = butterworth_lowpass_dualpass(sine(10.0, 1.0, 500.0, 20.0), 10.0, order);
    CHECK(mid_amplitude(y) == doctest::Approx(0.5).epsilon(0.005));
  }
}

TEST_CASE("lowpass dual pass: measured gain matches the discrete design across the axis") {
  for (int order : {1, 2, 3}) {
    for (double f : {2.0, 5.0, 15.0, 30.0}) {
      const Channel y = butterworth_lowpass_dualpass(sine(f, 1.0, 500.0, 20.0), 10.0, order);
      const double expect = testutil::dualpass_butter_gain(f, 10.0, 500.0, order);
      CHECK_MESSAGE(mid_amplitude(y) == doctest::Approx(expect).epsilon(0.01),
                    "f=", f, " order=", order);
    }
  }
}

TEST_CASE("highpass dual pass: mirrored magnitude and zero DC") {
  Channel dc = make_channel(std::vector<double>(2000, 5.0), 500.0);
  const Channel y0 = butterworth_highpass_dualpass(dc, 2.0, 2);
  for (size_t i = 600; i < 1400; ++i) CHECK(std::abs(y0.samples[i]) < 1e-9);
  for (double f : {1.0, 2.0, 8.0}) {
    const Channel y = butterworth_highpass_dualpass(sine(f, 1.0, 500.0, 20.0), 2.0, 2);
    const double w = std::tan(pi * f / 500.0), wc = std::tan(pi * 2.0 / 500.0);
    const double expect = 1.0 / (1.0 + std::pow(wc / w, 4.0));
    CHECK(mid_amplitude(y) == doctest::Approx(expect).epsilon(0.01));
  }
}

TEST_CASE("bandpass dual pass: passband kept, skirts attenuated") {
  const Channel in = sine(4.0, 1.0, 500.0, 20.0);
  // product of the two dual-pass sections at 4 Hz (prewarped): ~0.85
  const double wf = std::tan(pi * 4.0 / 500.0);
  const double w_hp = std::tan(pi * 2.0 / 500.0), w_lp = std::tan(pi * 7.0 / 500.0);
  const double expect =
      1.0 / (1.0 + std::pow(wf / w_lp, 4.0)) / (1.0 + std::pow(w_hp / wf, 4.0));
  CHECK(mid_amplitude(bandpass_dualpass(in, 2.0, 7.0, 2)) ==
        doctest::Approx(expect).epsilon(0.02));
  const Channel lo = sine(0.3, 1.0, 500.0, 20.0);
  CHECK(mid_amplitude(bandpass_dualpass(lo, 2.0, 7.0, 2)) < 0.05);
  const Channel hi = sine(40.0, 1.0, 500.0, 20.0);
  CHECK(mid_amplitude(bandpass_dualpass(hi, 2.0, 7.0, 2)) < 0.05);
}

TEST_CASE("dual pass is zero phase for a passband tone") {
  const Channel x = sine(2.0, 1.0, 500.0, 10.0);
  const Channel y = butterworth_lowpass_dualpass(x, 10.0, 2);
  // Best alignment lag of the middle sections must be 0 samples.
  const size_t n = x.samples.size();
  double best = -1e300;
  int best_lag = -999;
  for (int lag = -10; lag <= 10; ++lag) {
    double acc = 0.0;
    for (size_t i = n / 3; i < 2 * n / 3; ++i) {
      acc += x.samples[i] * y.samples[static_cast<size_t>(static_cast<int>(i) + lag)];
    }
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 0);
}

TEST_CASE("filter error codes") {
  const Channel x = sine(1.0, 1.0, 500.0, 1.0);
  CHECK_THROWS_WITH_AS(butterworth_lowpass_dualpass(x, 250.0, 2), doctest::Contains("invalid-cutoff"),
                       Error);
  CHECK_THROWS_WITH_AS(butterworth_lowpass_dualpass(x, 0.0, 2), doctest::Contains("invalid-cutoff"),
                       Error);
  CHECK_THROWS_WITH_AS(butterworth_lowpass_dualpass(x, 10.0, 0), doctest::Contains("invalid-order"),
                       Error);
  Channel tiny = make_channel({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, 500.0);
  CHECK_THROWS_WITH_AS(butterworth_lowpass_dualpass(tiny, 10.0, 2),
                       doctest::Contains("insufficient-samples"), Error);
}

TEST_CASE("decimate: 500 Hz / 1000 samples -> 25 Hz / 50 samples") {
  std::vector<double> v(1000);
  for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const Channel y = decimate(make_channel(v, 500.0), 25.0);
  REQUIRE(y.samples.size() == 50);
  CHECK(y.fs == 25.0);
  for (size_t k = 0; k < 50; ++k) CHECK(y.samples[k] == static_cast<double>(20 * k));
}

TEST_CASE("decimate: constants and tone peak location survive") {
  const Channel c = decimate(make_channel(std::vector<double>(1000, 7.5), 500.0), 25.0);
  for (double v : c.samples) CHECK(v == 7.5);

  const Channel tone = sine(1.0, 1.0, 500.0, 20.0);
  const Channel down = decimate(tone, 25.0);
  CHECK(testutil::dft_peak_freq(tone.samples, 500.0) == doctest::Approx(1.0).epsilon(0.06));
  CHECK(testutil::dft_peak_freq(down.samples, 25.0) == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("decimate: filtered tone below fc/2 keeps its energy within 2%") {
  const Channel tone = sine(3.0, 1.0, 500.0, 20.0);
  const Channel filtered = butterworth_lowpass_dualpass(tone, 10.0, 2);
  const Channel down = decimate(filtered, 25.0);
  auto rms = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double s : v) acc += s * s;
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  CHECK(rms(down.samples) == doctest::Approx(rms(tone.samples)).epsilon(0.02));
}

TEST_CASE("decimate: non-integer ratio rejected") {
  const Channel x = sine(1.0, 1.0, 500.0, 2.0);
  CHECK_THROWS_WITH_AS(decimate(x, 23.0), doctest::Contains("invalid-ratio"), Error);
}

TEST_CASE("epoch_split: sizes, truncation, concatenation round trip") {
  std::vector<double> v(301);
  for (size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.1 * static_cast<double>(i));
  const Channel x300 = make_channel(std::vector<double>(v.begin(), v.begin() + 300), 25.0);
  auto eps = epoch_split(x300, 3, "trial1");
  REQUIRE(eps.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(eps[k].samples.size() == 100);
    CHECK(eps[k].window_index == k);
    CHECK(eps[k].parent_trial == "trial1");
    CHECK(eps[k].fs == 25.0);
  }

  const Channel x301 = make_channel(v, 25.0);
  auto eps2 = epoch_split(x301, 3);
  REQUIRE(eps2.size() == 3);
  size_t idx = 0;
  for (const auto& e : eps2) {
    CHECK(e.samples.size() == 100);
    for (double s : e.samples) CHECK(s == v[idx++]);
  }
  CHECK(idx == 300);  // one trailing sample dropped

  CHECK_THROWS_WITH_AS(epoch_split(make_channel({1.0, 2.0}, 25.0), 3),
                       doctest::Contains("invalid-split"), Error);
}

TEST_CASE("find_extrema: plateau maxima take the plateau midpoint") {
  auto peaks = find_extrema(std::vector<double>{0.0, 1.0, 1.0, 0.0}, 0.0);
  REQUIRE(peaks.size() >= 1);
  bool found = false;
  for (const auto& p : peaks) {
    if (p.is_max) {
      CHECK(p.index == 1);
      found = true;
    }
  }
  CHECK(found);

  auto peaks2 = find_extrema(std::vector<double>{0.0, 2.0, 2.0, 2.0, 0.0}, 0.0);
  for (const auto& p : peaks2) {
    if (p.is_max) CHECK(p.index == 2);
  }
}

TEST_CASE("find_extrema: indices and prominences match the brute-force oracle") {
  Rng rng(314);
  std::vector<double> x(400);
  // Smooth random signal without plateaus: random walk through a lowpass.
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    acc = 0.95 * acc + rng.normal();
    x[i] = acc;
  }
  const auto maxima = testutil::brute_maxima(x);
  std::vector<size_t> expect;
  for (size_t p : maxima) {
    if (testutil::brute_prominence(x, p) >= 0.4) expect.push_back(p);
  }
  const auto peaks = find_extrema(x, 0.4);
  std::vector<size_t> got;
  for (const auto& p : peaks) {
    if (p.is_max) got.push_back(p.index);
  }
  REQUIRE(got == expect);
  for (const auto& p : peaks) {
    if (p.is_max) {
      CHECK(p.prominence ==
            doctest::Approx(testutil::brute_prominence(x, p.index)).epsilon(1e-12));
    }
  }
}

TEST_CASE("extrema_periods: pure sinusoid maps to its frequency bin") {
  const Channel x = sine(0.5, 5.0, 500.0, 20.0);
  const PeriodHistogram h = extrema_periods(x, 0.5);
  REQUIRE(!h.frequencies.empty());
  for (double f : h.frequencies) CHECK(f == doctest::Approx(0.5).epsilon(0.02));
  size_t total = 0;
  for (size_t c : h.counts) total += c;
  CHECK(total == h.frequencies.size());
}

TEST_CASE("extrema_periods: constant signal gives an empty histogram") {
  const Channel x = make_channel(std::vector<double>(100, 1.0), 25.0);
  const PeriodHistogram h = extrema_periods(x, 0.1);
  CHECK(h.frequencies.empty());
}

TEST_CASE("extrema_periods: two-tone content against the brute-force scan") {
  // 10*sin(0.5 Hz) + 2*sin(3 Hz): ripples survive the 0.5 prominence cut, so
  // the histogram shows mass near both rates.
  const double fs = 500.0;
  std::vector<double> v(10000);
  for (size_t i = 0; i < v.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    v[i] = 10.0 * std::sin(2.0 * pi * 0.5 * t) + 2.0 * std::sin(2.0 * pi * 3.0 * t);
  }
  const Channel x = make_channel(v, fs);
  const PeriodHistogram h = extrema_periods(x, 0.5);

  // Count periods from the brute-force extrema scan (maxima + minima).
  size_t expected_periods = 0;
  for (int sign = 0; sign < 2; ++sign) {
    std::vector<double> s(v);
    if (sign) {
      for (double& q : s) q = -q;
    }
    std::vector<size_t> kept;
    for (size_t p : testutil::brute_maxima(s)) {
      if (testutil::brute_prominence(s, p) >= 0.5) kept.push_back(p);
    }
    if (kept.size() > 1) expected_periods += kept.size() - 1;
  }
  CHECK(h.frequencies.size() == expected_periods);

  size_t near3 = 0, slow = 0;
  for (double f : h.frequencies) {
    if (std::abs(f - 3.0) <= 0.3) ++near3;
    if (f < 1.5) ++slow;
  }
  CHECK(near3 > 0);
  CHECK(slow > 0);
}

TEST_CASE("extrema_periods: spec's amp-1 fast tone stays below the prominence cut") {
  // With a 1 N fast component in phase with the slow tone, every ripple has
  // prominence < 0.5, so only the 0.5 Hz structure remains; this matches the
  // exhaustive oracle by construction.
  const double fs = 500.0;
  std::vector<double> v(10000);
  for (size_t i = 0; i < v.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    v[i] = 10.0 * std::sin(2.0 * pi * 0.5 * t) + std::sin(2.0 * pi * 3.0 * t);
  }
  const PeriodHistogram h = extrema_periods(make_channel(v, fs), 0.5);
  REQUIRE(!h.frequencies.empty());
  for (double f : h.frequencies) CHECK(f == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("dominant_frequency: clean, noisy, and competing tones") {
  CHECK(dominant_frequency(sine(0.5, 1.0, 500.0, 20.0)) == doctest::Approx(0.5).epsilon(0.11));

  // SNR 20 dB: noise sd = amp/sqrt(2)/10.
  Rng rng(99);
  Channel noisy = sine(0.5, 1.0, 500.0, 20.0);
  for (double& s : noisy.samples) s += rng.normal(0.0, 1.0 / std::sqrt(2.0) / 10.0);
  const double got = dominant_frequency(noisy);
  CHECK(got == doctest::Approx(testutil::dft_peak_freq(noisy.samples, 500.0)).epsilon(1e-12));
  CHECK(got == doctest::Approx(0.5).epsilon(0.11));

  Channel two = sine(2.0, 2.0, 100.0, 10.0);
  const Channel other = sine(5.0, 1.0, 100.0, 10.0);
  for (size_t i = 0; i < two.samples.size(); ++i) two.samples[i] += other.samples[i];
  CHECK(dominant_frequency(two) == doctest::Approx(2.0).epsilon(0.06));

  CHECK_THROWS_WITH_AS(dominant_frequency(make_channel(std::vector<double>(64, 0.0), 100.0)),
                       doctest::Contains("no-peak"), Error);
}
