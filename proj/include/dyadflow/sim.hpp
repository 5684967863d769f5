#pragma once

#include <cstdint>
#include <string>

#include "dyadflow/trial.hpp"

namespace dyadflow {

enum class CouplingDirection { none, a_to_b, b_to_a };

std::string to_string(CouplingDirection d);
CouplingDirection coupling_direction_from_string(const std::string& s);

// Synthetic dyad generator parameters. The follower force adds a band-passed,
// delayed copy of the leader force, so ground-truth influence direction,
// band, and gain are known exactly.
struct SimConfig {
  double movement_freq_hz = 1.25;   // shared rhythm frequency
  double movement_amp_n = 4.0;      // rhythm force amplitude (N)
  double coupling_gain = 0.0;
  double coupling_band_lo_hz = 2.15;
  double coupling_band_hi_hz = 7.0;
  double coupling_delay_s = 0.08;
  CouplingDirection direction = CouplingDirection::a_to_b;  // ignored at gain 0
  double noise_sd_a_n = 1.0;
  double noise_sd_b_n = 1.0;
  double role_amp_ratio = 1.0;      // A rhythm amplitude relative to B
  double phase_jitter_sd_rad = 0.2; // OU stationary sd of the rhythm phase
  DyadMasses masses{2.0, 2.0, 16.5};
  double fs_hz = 500.0;
  double duration_s = 9.0;
  double silence_s = 1.0;           // metronome starts after this
  uint64_t seed = 1;
  int n_dyads = 1;                  // batch driver only; simulate() ignores it
};

struct GroundTruth {
  CouplingDirection direction = CouplingDirection::none;
  double band_lo_hz = 0.0;
  double band_hi_hz = 0.0;
  double gain = 0.0;
};

struct SimTrial {
  TrialRecord trial;
  GroundTruth truth;
};

// One synthetic trial:
//   F_leader   = role-scaled rhythm + white noise
//   F_follower = rhythm + white noise + gain * bandpass(delay(F_leader))
// with rhythm = movement_amp * sin(2 pi f0 t + phi_OU(t)). Sensor channels
// come from invert_forces; position is the double trapezoid integral of the
// acceleration with integration constants chosen to zero-mean the result.
// Beats fire every metronome period (half the movement period) from
// silence_s to duration. Same config (incl. seed) -> bit-identical output.
SimTrial simulate(const SimConfig& cfg);

// Time-domain Granger causality by two nested least-squares regressions of
// order p on identical effective samples:
//   gc_xy = ln(RSS(y | y-lags) / RSS(y | y-lags, x-lags))   (x "causes" y)
// Inputs are demeaned internally.
struct TimeDomainGc {
  double gc_xy = 0.0;
  double gc_yx = 0.0;
};
TimeDomainGc time_domain_gc_oracle(const std::vector<double>& x, const std::vector<double>& y,
                                   int p);

}  // namespace dyadflow
