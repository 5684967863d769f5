#include "dyadflow/sim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "dyadflow/rng.hpp"
#include "dyadflow/signal.hpp"

namespace dyadflow {

std::string to_string(CouplingDirection d) {
  switch (d) {
    case CouplingDirection::a_to_b:
      return "a_to_b";
    case CouplingDirection::b_to_a:
      return "b_to_a";
    default:
      return "none";
  }
}

CouplingDirection coupling_direction_from_string(const std::string& s) {
  if (s == "a_to_b") return CouplingDirection::a_to_b;
  if (s == "b_to_a") return CouplingDirection::b_to_a;
  if (s == "none") return CouplingDirection::none;
  throw Error("config-error", "unknown coupling direction '" + s + "'");
}

namespace {

void validate_config(const SimConfig& c) {
  if (c.fs_hz <= 0.0 || c.duration_s <= 0.0) {
    throw Error("config-error", "fs and duration must be positive");
  }
  if (c.movement_freq_hz <= 0.0 || c.movement_amp_n < 0.0) {
    throw Error("config-error", "movement frequency must be positive, amplitude nonnegative");
  }
  if (c.coupling_gain < 0.0 || c.noise_sd_a_n < 0.0 || c.noise_sd_b_n < 0.0 ||
      c.role_amp_ratio < 0.0) {
    throw Error("config-error", "gains and noise levels must be nonnegative");
  }
  if (c.coupling_band_lo_hz <= 0.0 || c.coupling_band_lo_hz >= c.coupling_band_hi_hz) {
    throw Error("config-error", "coupling band must satisfy 0 < lo < hi");
  }
  if (c.fs_hz < 2.0 * c.coupling_band_hi_hz) {
    throw Error("config-error", "fs must be at least twice the coupling band upper edge");
  }
  if (c.masses.m1 <= 0.0 || c.masses.m2 <= 0.0 || c.masses.M <= 0.0) {
    throw Error("config-error", "masses must be positive");
  }
  if (c.silence_s < 0.0 || c.silence_s >= c.duration_s) {
    throw Error("config-error", "silence must lie inside the trial");
  }
}

}  // namespace

SimTrial simulate(const SimConfig& cfg) {
  validate_config(cfg);
  const size_t n = static_cast<size_t>(std::llround(cfg.duration_s * cfg.fs_hz));
  if (n < 32) throw Error("config-error", "trial too short");
  const double dt = 1.0 / cfg.fs_hz;
  Rng rng(cfg.seed);

  // Ornstein-Uhlenbeck phase jitter (stationary sd = phase_jitter_sd_rad),
  // then the two noise streams; fixed draw order keeps output reproducible.
  constexpr double kTheta = 0.5;  // 1/s mean reversion
  std::vector<double> phase(n, 0.0);
  if (cfg.phase_jitter_sd_rad > 0.0) {
    const double step_sd = cfg.phase_jitter_sd_rad * std::sqrt(2.0 * kTheta * dt);
    phase[0] = cfg.phase_jitter_sd_rad * rng.normal();
    for (size_t t = 1; t < n; ++t) {
      phase[t] = phase[t - 1] * (1.0 - kTheta * dt) + step_sd * rng.normal();
    }
  }
  std::vector<double> noise_a(n), noise_b(n);
  for (size_t t = 0; t < n; ++t) noise_a[t] = cfg.noise_sd_a_n * rng.normal();
  for (size_t t = 0; t < n; ++t) noise_b[t] = cfg.noise_sd_b_n * rng.normal();

  std::vector<double> rhythm(n);
  const double omega = 2.0 * std::numbers::pi * cfg.movement_freq_hz;
  for (size_t t = 0; t < n; ++t) {
    rhythm[t] = cfg.movement_amp_n * std::sin(omega * static_cast<double>(t) * dt + phase[t]);
  }

  std::vector<double> fa(n), fb(n);
  for (size_t t = 0; t < n; ++t) {
    fa[t] = cfg.role_amp_ratio * rhythm[t] + noise_a[t];
    fb[t] = rhythm[t] + noise_b[t];
  }
  const bool coupled = cfg.coupling_gain > 0.0 && cfg.direction != CouplingDirection::none;
  if (coupled) {
    const std::vector<double>& leader = cfg.direction == CouplingDirection::a_to_b ? fa : fb;
    std::vector<double>& follower = cfg.direction == CouplingDirection::a_to_b ? fb : fa;
    const size_t lag = static_cast<size_t>(std::llround(cfg.coupling_delay_s * cfg.fs_hz));
    std::vector<double> delayed(n, 0.0);
    for (size_t t = lag; t < n; ++t) delayed[t] = leader[t - lag];
    const Channel shaped = bandpass_dualpass({std::move(delayed), cfg.fs_hz, "coupling"},
                                             cfg.coupling_band_lo_hz, cfg.coupling_band_hi_hz, 2);
    for (size_t t = 0; t < n; ++t) follower[t] += cfg.coupling_gain * shaped.samples[t];
  }

  SimTrial out;
  out.trial.trial_id = "sim-" + std::to_string(cfg.seed);
  out.trial.dyad_id = "simdyad";
  const Channel f1{std::move(fa), cfg.fs_hz, "f1"};
  const Channel f2{std::move(fb), cfg.fs_hz, "f2"};
  SensorPair sensors = invert_forces(f1, f2, cfg.masses);
  out.trial.s1 = std::move(sensors.s1);
  out.trial.s2 = std::move(sensors.s2);

  // Double trapezoid integration of the acceleration; the integration
  // constants (x0, v0) are chosen afterwards by removing the least-squares
  // line, which centers the trace without touching its dynamics.
  const std::vector<double>& acc = sensors.acceleration.samples;
  std::vector<double> vel(n, 0.0), pos(n, 0.0);
  for (size_t t = 1; t < n; ++t) vel[t] = vel[t - 1] + 0.5 * (acc[t - 1] + acc[t]) * dt;
  for (size_t t = 1; t < n; ++t) pos[t] = pos[t - 1] + 0.5 * (vel[t - 1] + vel[t]) * dt;
  double sum_t = 0.0, sum_tt = 0.0, sum_x = 0.0, sum_tx = 0.0;
  for (size_t t = 0; t < n; ++t) {
    const double tt = static_cast<double>(t) * dt;
    sum_t += tt;
    sum_tt += tt * tt;
    sum_x += pos[t];
    sum_tx += tt * pos[t];
  }
  const double dn = static_cast<double>(n);
  const double slope = (dn * sum_tx - sum_t * sum_x) / (dn * sum_tt - sum_t * sum_t);
  const double intercept = (sum_x - slope * sum_t) / dn;
  for (size_t t = 0; t < n; ++t) pos[t] -= intercept + slope * static_cast<double>(t) * dt;
  out.trial.position = {std::move(pos), cfg.fs_hz, "pos"};

  // Metronome: one beat per target-to-target leg = half the movement period.
  const double beat_period = 1.0 / (2.0 * cfg.movement_freq_hz);
  for (double tb = cfg.silence_s; tb < cfg.duration_s - 0.5 * dt; tb += beat_period) {
    out.trial.beats.push_back(tb);
  }
  const double total_amp = cfg.movement_amp_n * (1.0 + cfg.role_amp_ratio);
  const double total_mass = cfg.masses.m1 + cfg.masses.m2 + cfg.masses.M;
  out.trial.condition.target_distance_m = 2.0 * total_amp / (total_mass * omega * omega);
  out.trial.condition.metronome_period_s = beat_period;
  out.trial.condition.role_a = "synch";
  out.trial.condition.role_b = "target";

  out.truth.direction = coupled ? cfg.direction : CouplingDirection::none;
  out.truth.gain = coupled ? cfg.coupling_gain : 0.0;
  if (coupled) {
    out.truth.band_lo_hz = cfg.coupling_band_lo_hz;
    out.truth.band_hi_hz = cfg.coupling_band_hi_hz;
  }
  return out;
}

namespace {

// RSS of regressing target[t] on `lags` past values of each series in
// `regressors`, t from max_lag onward, via pooled normal equations.
double regression_rss(const std::vector<const std::vector<double>*>& regressors,
                      const std::vector<double>& target, int lags, int start) {
  const int dim = lags * static_cast<int>(regressors.size());
  const size_t n = target.size();
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd row(dim);
  double yty = 0.0;
  int count = 0;
  for (size_t t = static_cast<size_t>(start); t < n; ++t) {
    int c = 0;
    for (const auto* series : regressors) {
      for (int k = 1; k <= lags; ++k) row[c++] = (*series)[t - static_cast<size_t>(k)];
    }
    xtx.noalias() += row * row.transpose();
    xty.noalias() += row * target[t];
    yty += target[t] * target[t];
    ++count;
  }
  if (count <= dim) throw Error("insufficient-samples", "series too short for GC oracle");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (lu.rank() < dim) throw Error("rank-deficient", "GC oracle design matrix rank deficient");
  const Eigen::VectorXd beta = lu.solve(xty);
  return yty - 2.0 * beta.dot(xty) + beta.dot(xtx * beta);
}

}  // namespace

TimeDomainGc time_domain_gc_oracle(const std::vector<double>& x, const std::vector<double>& y,
                                   int p) {
  if (p < 1) throw Error("invalid-order", "lag order must be >= 1");
  if (x.size() != y.size()) throw Error("channel-mismatch", "series lengths differ");
  std::vector<double> xd = x, yd = y;
  for (auto* v : {&xd, &yd}) {
    double mean = 0.0;
    for (double s : *v) mean += s;
    mean /= static_cast<double>(v->size());
    for (double& s : *v) s -= mean;
  }
  TimeDomainGc gc;
  const double rss_y_own = regression_rss({&yd}, yd, p, p);
  const double rss_y_full = regression_rss({&yd, &xd}, yd, p, p);
  gc.gc_xy = std::log(rss_y_own / rss_y_full);
  const double rss_x_own = regression_rss({&xd}, xd, p, p);
  const double rss_x_full = regression_rss({&xd, &yd}, xd, p, p);
  gc.gc_yx = std::log(rss_x_own / rss_x_full);
  return gc;
}

}  // namespace dyadflow
