#include "dyadflow/var.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dyadflow/rng.hpp"

namespace dyadflow {

namespace {

struct Prepared {
  // Demeaned epochs in canonical (parent_trial, window_index) order;
  // [epoch][channel][sample].
  std::vector<std::array<std::vector<double>, 2>> data;
  double fs = 0.0;
  size_t epoch_len = 0;
};

Prepared prepare(const std::vector<EpochPair>& epochs, int min_len) {
  if (epochs.empty()) throw Error("insufficient-samples", "no epochs to fit");
  std::vector<const EpochPair*> order;
  order.reserve(epochs.size());
  for (const auto& e : epochs) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const EpochPair* x, const EpochPair* y) {
    if (x->a.parent_trial != y->a.parent_trial) return x->a.parent_trial < y->a.parent_trial;
    return x->a.window_index < y->a.window_index;
  });

  Prepared p;
  p.fs = epochs.front().a.fs;
  p.epoch_len = epochs.front().a.samples.size();
  for (const EpochPair* e : order) {
    if (e->a.samples.size() != p.epoch_len || e->b.samples.size() != p.epoch_len) {
      throw Error("channel-mismatch", "epochs must all share one length");
    }
    if (e->a.fs != p.fs || e->b.fs != p.fs) {
      throw Error("channel-mismatch", "epochs must share one sampling rate");
    }
    if (p.epoch_len <= static_cast<size_t>(min_len)) {
      throw Error("insufficient-samples",
                  "epoch length " + std::to_string(p.epoch_len) + " too short for order (need > " +
                      std::to_string(min_len) + ")");
    }
    std::array<std::vector<double>, 2> d;
    d[0] = e->a.samples;
    d[1] = e->b.samples;
    for (auto& ch : d) {
      double mean = 0.0;
      for (double v : ch) mean += v;
      mean /= static_cast<double>(ch.size());
      for (double& v : ch) v -= mean;
    }
    p.data.push_back(std::move(d));
  }
  return p;
}

struct FitOutput {
  VarModel model;
  Eigen::Matrix2d sigma_ml;  // RSS/N, no df correction (order selection)
  int n = 0;                 // regressed samples
};

// Pooled OLS at order p, regressing targets from index `start` (>= p) of
// every epoch so order candidates can share identical targets.
FitOutput fit_at(const Prepared& prep, int p, int start) {
  const int dim = 2 * p;
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd xty = Eigen::MatrixXd::Zero(dim, 2);
  Eigen::VectorXd row(dim);
  int n = 0;
  for (const auto& d : prep.data) {
    for (size_t t = static_cast<size_t>(start); t < prep.epoch_len; ++t) {
      for (int k = 1; k <= p; ++k) {
        row[2 * (k - 1)] = d[0][t - static_cast<size_t>(k)];
        row[2 * (k - 1) + 1] = d[1][t - static_cast<size_t>(k)];
      }
      xtx.noalias() += row * row.transpose();
      xty.col(0).noalias() += row * d[0][t];
      xty.col(1).noalias() += row * d[1][t];
      ++n;
    }
  }
  if (n <= dim) throw Error("insufficient-samples", "fewer regressed samples than parameters");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (lu.rank() < dim) throw Error("rank-deficient", "regressor matrix is rank deficient");
  const Eigen::MatrixXd beta = lu.solve(xty);  // dim x 2

  Eigen::Matrix2d rss = Eigen::Matrix2d::Zero();
  for (const auto& d : prep.data) {
    for (size_t t = static_cast<size_t>(start); t < prep.epoch_len; ++t) {
      for (int k = 1; k <= p; ++k) {
        row[2 * (k - 1)] = d[0][t - static_cast<size_t>(k)];
        row[2 * (k - 1) + 1] = d[1][t - static_cast<size_t>(k)];
      }
      const double r0 = d[0][t] - row.dot(beta.col(0));
      const double r1 = d[1][t] - row.dot(beta.col(1));
      rss(0, 0) += r0 * r0;
      rss(0, 1) += r0 * r1;
      rss(1, 1) += r1 * r1;
    }
  }
  rss(1, 0) = rss(0, 1);

  FitOutput out;
  out.n = n;
  out.sigma_ml = rss / static_cast<double>(n);
  out.model.order = p;
  out.model.fs = prep.fs;
  out.model.n_samples = n;
  out.model.sigma = rss / static_cast<double>(n - dim);
  out.model.coeffs.resize(p);
  for (int k = 0; k < p; ++k) {
    // beta rows hold regressor weights; A_k(i, j) = weight of channel j at
    // lag k+1 in the equation for channel i.
    out.model.coeffs[k](0, 0) = beta(2 * k, 0);
    out.model.coeffs[k](0, 1) = beta(2 * k + 1, 0);
    out.model.coeffs[k](1, 0) = beta(2 * k, 1);
    out.model.coeffs[k](1, 1) = beta(2 * k + 1, 1);
  }
  return out;
}

}  // namespace

VarModel fit_var(const std::vector<EpochPair>& epochs, int order) {
  if (order < 1) throw Error("invalid-order", "VAR order must be >= 1");
  Prepared prep = prepare(epochs, order + 10);
  return fit_at(prep, order, order).model;
}

std::vector<double> aic_curve(const std::vector<EpochPair>& epochs, int p_max) {
  if (p_max < 1) throw Error("invalid-order", "p_max must be >= 1");
  Prepared prep = prepare(epochs, p_max + 10);
  std::vector<double> aic;
  aic.reserve(p_max);
  for (int p = 1; p <= p_max; ++p) {
    FitOutput fo = fit_at(prep, p, p_max);
    const double det = fo.sigma_ml.determinant();
    if (det <= 0.0) throw Error("rank-deficient", "singular residual covariance at order " +
                                                      std::to_string(p));
    aic.push_back(static_cast<double>(fo.n) * std::log(det) + 2.0 * (4.0 * p));
  }
  return aic;
}

int select_order(const std::vector<EpochPair>& epochs, int p_max) {
  const std::vector<double> aic = aic_curve(epochs, p_max);
  int best = 1;
  for (int p = 2; p <= p_max; ++p) {
    if (aic[static_cast<size_t>(p - 1)] < aic[static_cast<size_t>(best - 1)]) best = p;
  }
  return best;
}

double companion_spectral_radius(const VarModel& m) {
  const int p = m.order;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * p, 2 * p);
  for (int k = 0; k < p; ++k) c.block<2, 2>(0, 2 * k) = m.coeffs[static_cast<size_t>(k)];
  for (int k = 1; k < p; ++k) c.block<2, 2>(2 * k, 2 * (k - 1)) = Eigen::Matrix2d::Identity();
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(c, false).eigenvalues();
  double radius = 0.0;
  for (int i = 0; i < ev.size(); ++i) radius = std::max(radius, std::abs(ev[i]));
  return radius;
}

bool is_stable(const VarModel& m) { return companion_spectral_radius(m) < 1.0; }

std::pair<std::vector<double>, std::vector<double>> simulate_var(const VarModel& m, int n,
                                                                 Rng& rng, int burn_in) {
  if (n <= 0) throw Error("invalid-order", "sample count must be positive");
  const Eigen::LLT<Eigen::Matrix2d> llt(m.sigma);
  if (llt.info() != Eigen::Success) {
    throw Error("invalid-covariance", "innovation covariance is not positive definite");
  }
  const Eigen::Matrix2d l = llt.matrixL();
  const int p = m.order;
  std::vector<Eigen::Vector2d> hist(static_cast<size_t>(p), Eigen::Vector2d::Zero());
  std::vector<double> x, y;
  x.reserve(static_cast<size_t>(n));
  y.reserve(static_cast<size_t>(n));
  for (int t = 0; t < burn_in + n; ++t) {
    Eigen::Vector2d v = l * Eigen::Vector2d(rng.normal(), rng.normal());
    for (int k = 0; k < p; ++k) v.noalias() += m.coeffs[static_cast<size_t>(k)] * hist[static_cast<size_t>(k)];
    for (int k = p - 1; k > 0; --k) hist[static_cast<size_t>(k)] = hist[static_cast<size_t>(k - 1)];
    if (p > 0) hist[0] = v;
    if (t >= burn_in) {
      x.push_back(v[0]);
      y.push_back(v[1]);
    }
  }
  return {std::move(x), std::move(y)};
}

}  // namespace dyadflow
