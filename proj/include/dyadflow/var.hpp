#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dyadflow/channel.hpp"

namespace dyadflow {

// Bivariate VAR(p) fitted by pooled least squares over epochs.
struct VarModel {
  std::vector<Eigen::Matrix2d> coeffs;  // A_1..A_p
  Eigen::Matrix2d sigma;                // residual covariance (df-corrected)
  int order = 0;
  double fs = 0.0;
  int n_samples = 0;  // regressed samples pooled over epochs
};

// Pairs of epochs (same trial/window) carrying the two force series.
struct EpochPair {
  Epoch a;
  Epoch b;
};

// Pooled OLS fit: each epoch is demeaned independently, regressions never
// cross epoch boundaries, and epochs are accumulated in canonical
// (parent_trial, window_index) order so the result is independent of the
// caller's ordering. Sigma uses denominator (N_regressed - 2p).
VarModel fit_var(const std::vector<EpochPair>& epochs, int order);

// Standard AIC over orders 1..p_max with all candidates regressing the same
// targets (samples from t = p_max on): n*ln det(Sigma_ML) + 2*(4p).
// Returns the argmin.
int select_order(const std::vector<EpochPair>& epochs, int p_max);
std::vector<double> aic_curve(const std::vector<EpochPair>& epochs, int p_max);

// Spectral radius of the companion matrix; model is stable iff < 1.
double companion_spectral_radius(const VarModel& m);
bool is_stable(const VarModel& m);

// Simulate n samples from the model (zero mean) with N(0, sigma) innovations
// drawn via the portable Rng; burn_in samples are discarded.
class Rng;
std::pair<std::vector<double>, std::vector<double>> simulate_var(const VarModel& m, int n,
                                                                 Rng& rng, int burn_in = 1000);

}  // namespace dyadflow
