// Shared test utilities: independent numeric oracles (kept deliberately
// naive so they cannot share bugs with the library) and scratch-directory
// management.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace testutil {

// O(n^2) DFT; returns the complex coefficient at integer bin k.
inline std::complex<double> dft_bin(const std::vector<double>& x, size_t k) {
  std::complex<double> acc{0.0, 0.0};
  const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(x.size());
  for (size_t t = 0; t < x.size(); ++t) {
    acc += x[t] * std::complex<double>(std::cos(w * static_cast<double>(t)),
                                       std::sin(w * static_cast<double>(t)));
  }
  return acc;
}

// Frequency (Hz) of the largest nonzero DFT bin.
inline double dft_peak_freq(const std::vector<double>& x, double fs) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double best = -1.0;
  size_t best_k = 1;
  for (size_t k = 1; k <= x.size() / 2; ++k) {
    std::vector<double> centered(x);
    for (double& v : centered) v -= mean;
    const double mag = std::abs(dft_bin(centered, k));
    if (mag > best) {
      best = mag;
      best_k = k;
    }
  }
  return fs * static_cast<double>(best_k) / static_cast<double>(x.size());
}

// Strict local maxima by exhaustive neighbor comparison (no plateaus
// expected in the inputs this is used on).
inline std::vector<size_t> brute_maxima(const std::vector<double>& x) {
  std::vector<size_t> out;
  for (size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > x[i - 1] && x[i] > x[i + 1]) out.push_back(i);
  }
  return out;
}

// Prominence by definition: walk out to the nearest higher ground on each
// side, take the minimum in between, prominence = peak - max(left, right
// interval minimum).
inline double brute_prominence(const std::vector<double>& x, size_t peak) {
  double left_min = x[peak];
  for (size_t i = peak; i-- > 0;) {
    if (x[i] > x[peak]) break;
    left_min = std::min(left_min, x[i]);
  }
  double right_min = x[peak];
  for (size_t i = peak + 1; i < x.size(); ++i) {
    if (x[i] > x[peak]) break;
    right_min = std::min(right_min, x[i]);
  }
  return x[peak] - std::max(left_min, right_min);
}

// Expected magnitude response of the forward+backward Butterworth pass
// designed by bilinear transform: |H|^2 with the analog prototype evaluated
// at the prewarped frequency.
inline double dualpass_butter_gain(double f_hz, double fc_hz, double fs_hz, int order) {
  const double w = std::tan(std::numbers::pi * f_hz / fs_hz);
  const double wc = std::tan(std::numbers::pi * fc_hz / fs_hz);
  const double single = 1.0 / (1.0 + std::pow(w / wc, 2.0 * order));
  return single;  // |H|^2 of one pass == gain of the dual pass
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("dyadflow_test_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& rel = {}) const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string repo_file(const std::string& rel) {
  return std::string(DYADFLOW_REPO_DIR) + "/" + rel;
}

}  // namespace testutil
