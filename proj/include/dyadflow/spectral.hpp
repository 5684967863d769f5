#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dyadflow/channel.hpp"
#include "dyadflow/var.hpp"

namespace dyadflow {

using Matrix2cd = Eigen::Matrix2cd;

// Frequency grid 0..fs/2 inclusive with the given step. The step must divide
// fs/2 to within 1e-9 so the Nyquist point lands on the grid.
std::vector<double> frequency_grid(double fs, double step_hz);

// One-sided spectral decomposition on an explicit frequency grid: spectral
// matrix S(f), transfer matrix H(f) and innovation covariance Sigma with
// S = H Sigma H^dagger at every grid point.
struct SpectralDecomposition {
  std::vector<double> freqs;
  std::vector<Matrix2cd> S;
  std::vector<Matrix2cd> H;
  Eigen::Matrix2d sigma;
  double fs = 0.0;
};

// Parametric route: H(f) = (I - sum_k A_k e^{-i 2 pi f k / fs})^{-1},
// S = H Sigma H^dagger. Throws on unstable models.
SpectralDecomposition var_to_spectral(const VarModel& m, const std::vector<double>& freqs);

// Nonparametric route: Wilson spectral factorization of a sampled spectral
// matrix (uniform grid 0..fs/2 with N/2+1 points for an even N-point circle).
// Returns H and Sigma such that S ~= H Sigma H^dagger.
SpectralDecomposition wilson_factorize(const std::vector<double>& freqs,
                                       const std::vector<Matrix2cd>& S, double fs,
                                       double tol = 1e-8, int max_iter = 500);

}  // namespace dyadflow
