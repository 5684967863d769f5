#include "dyadflow/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>

namespace dyadflow {

std::vector<double> frequency_grid(double fs, double step_hz) {
  if (fs <= 0.0 || step_hz <= 0.0) throw Error("grid-error", "fs and step must be positive");
  const double nyq = fs / 2.0;
  const double bins = nyq / step_hz;
  const long n = std::lround(bins);
  if (n < 1 || std::abs(bins - static_cast<double>(n)) > 1e-9) {
    throw Error("grid-error", "step " + std::to_string(step_hz) + " Hz must divide fs/2 = " +
                                  std::to_string(nyq));
  }
  std::vector<double> freqs(static_cast<size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) freqs[static_cast<size_t>(i)] = static_cast<double>(i) * step_hz;
  return freqs;
}

SpectralDecomposition var_to_spectral(const VarModel& m, const std::vector<double>& freqs) {
  if (freqs.empty()) throw Error("grid-error", "empty frequency grid");
  const double radius = companion_spectral_radius(m);
  if (radius >= 1.0) {
    throw Error("non-invertible",
                "model unstable (companion spectral radius " + std::to_string(radius) + ")");
  }
  SpectralDecomposition d;
  d.freqs = freqs;
  d.sigma = m.sigma;
  d.fs = m.fs;
  d.S.reserve(freqs.size());
  d.H.reserve(freqs.size());
  const std::complex<double> minus_i(0.0, -1.0);
  for (double f : freqs) {
    Matrix2cd a = Matrix2cd::Identity();
    for (int k = 1; k <= m.order; ++k) {
      const std::complex<double> e =
          std::exp(minus_i * (2.0 * std::numbers::pi * f * static_cast<double>(k) / m.fs));
      a -= m.coeffs[static_cast<size_t>(k - 1)].cast<std::complex<double>>() * e;
    }
    const Matrix2cd h = a.inverse();
    d.H.push_back(h);
    d.S.push_back(h * m.sigma.cast<std::complex<double>>() * h.adjoint());
  }
  return d;
}

namespace {

using Spec = std::vector<Matrix2cd>;

// Half grid (N/2 + 1 points, 0..fs/2) -> full N-point circle using the
// real-process symmetry S(-f) = conj(S(f)).
Spec full_circle(const Spec& half) {
  Spec full = half;
  for (size_t j = half.size() - 2; j >= 1; --j) full.push_back(half[j].conjugate());
  return full;
}

// Elementwise FFT over the frequency axis. inverse=true applies 1/N.
Spec fft_over_freq(const Spec& in, bool inverse) {
  const size_t n = in.size();
  Eigen::FFT<double> fft;
  Spec out(n);
  std::vector<std::complex<double>> buf(n), res(n);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      for (size_t j = 0; j < n; ++j) buf[j] = in[j](r, c);
      if (inverse) {
        fft.inv(res, buf);
      } else {
        fft.fwd(res, buf);
      }
      for (size_t j = 0; j < n; ++j) out[j](r, c) = res[j];
    }
  }
  return out;
}

// Causal projection: real lag coefficients, keep the upper triangle of half
// the zero-lag term plus lags 1..N/2-1, zero the rest.
Spec plus_operator(const Spec& g_half) {
  Spec lags = fft_over_freq(full_circle(g_half), /*inverse=*/true);
  const size_t n = lags.size();
  for (auto& m : lags) m = m.real().cast<std::complex<double>>();
  Eigen::Matrix2cd beta0 = 0.5 * lags[0];
  beta0(1, 0) = 0.0;  // triu
  lags[0] = beta0;
  for (size_t j = n / 2; j < n; ++j) lags[j].setZero();
  Spec gp = fft_over_freq(lags, /*inverse=*/false);
  gp.resize(g_half.size());
  return gp;
}

}  // namespace

SpectralDecomposition wilson_factorize(const std::vector<double>& freqs, const Spec& S, double fs,
                                       double tol, int max_iter) {
  const size_t m = freqs.size();
  if (m < 2 || S.size() != m) throw Error("grid-error", "need matching grid of >= 2 points");
  const double step = freqs[1] - freqs[0];
  for (size_t j = 0; j + 1 < m; ++j) {
    if (std::abs(freqs[j + 1] - freqs[j] - step) > 1e-9) {
      throw Error("grid-error", "frequency grid must be uniform");
    }
  }
  if (std::abs(freqs.front()) > 1e-9 || std::abs(freqs.back() - fs / 2.0) > 1e-6) {
    throw Error("grid-error", "grid must cover 0..fs/2 inclusive");
  }
  double smax = 0.0;
  for (const auto& sj : S) {
    if ((sj - sj.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + sj.cwiseAbs().maxCoeff())) {
      throw Error("invalid-spectrum", "spectral matrix is not Hermitian");
    }
    smax = std::max(smax, sj.cwiseAbs().maxCoeff());
  }
  for (size_t j = 0; j < m; ++j) {
    Eigen::SelfAdjointEigenSolver<Matrix2cd> es(S[j]);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, smax)) {
      throw Error("invalid-spectrum", "spectral matrix not positive semidefinite at " +
                                          std::to_string(freqs[j]) + " Hz");
    }
  }

  // psi initialized at every grid point to the upper Cholesky factor of the
  // circle-averaged spectrum (the zero-lag covariance).
  const Spec circle = full_circle(S);
  Matrix2cd mean = Matrix2cd::Zero();
  for (const auto& sj : circle) mean += sj;
  mean /= static_cast<double>(circle.size());
  Eigen::Matrix2d mean_re = mean.real();
  Eigen::LLT<Eigen::Matrix2d> llt(mean_re);
  if (llt.info() != Eigen::Success) {
    throw Error("invalid-spectrum", "circle-averaged spectrum is not positive definite");
  }
  const Eigen::Matrix2d upper = llt.matrixL().transpose();
  Spec psi(m, upper.cast<std::complex<double>>());

  bool converged = false;
  for (int iter = 0; iter < max_iter && !converged; ++iter) {
    Spec g(m);
    for (size_t j = 0; j < m; ++j) {
      const Matrix2cd inv = psi[j].inverse();
      g[j] = inv * S[j] * inv.adjoint() + Matrix2cd::Identity();
    }
    const Spec gp = plus_operator(g);
    double err = 0.0;
    for (size_t j = 0; j < m; ++j) {
      const Matrix2cd next = psi[j] * gp[j];
      const double denom = psi[j].norm();
      err = std::max(err, (next - psi[j]).norm() / (denom > 0.0 ? denom : 1.0));
      psi[j] = next;
    }
    converged = err < tol;
  }
  if (!converged) {
    throw Error("no-convergence",
                "Wilson factorization did not converge in " + std::to_string(max_iter) +
                    " iterations");
  }

  // A0 = zero-lag coefficient of psi; Sigma = A0 A0^T; H = psi A0^{-1}.
  const Spec psi_lags = fft_over_freq(full_circle(psi), /*inverse=*/true);
  const Eigen::Matrix2d a0 = psi_lags[0].real();
  SpectralDecomposition d;
  d.freqs = freqs;
  d.fs = fs;
  d.sigma = a0 * a0.transpose();
  d.S = S;
  d.H.reserve(m);
  const Matrix2cd a0_inv = a0.cast<std::complex<double>>().inverse();
  for (size_t j = 0; j < m; ++j) d.H.push_back(psi[j] * a0_inv);
  return d;
}

}  // namespace dyadflow
