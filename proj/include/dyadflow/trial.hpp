#pragma once

#include <string>
#include <vector>

#include "dyadflow/channel.hpp"
#include "dyadflow/force.hpp"

namespace dyadflow {

// Condition metadata attached to each trial via the session manifest.
struct TrialCondition {
  double target_distance_m = 0.0;   // distance between target centers
  double metronome_period_s = 0.0;  // full metronome (beat-to-beat) period
  std::string role_a;               // e.g. "synch"
  std::string role_b;               // e.g. "target"
};

// One synchronized recording: two sensor channels, slider position, beat
// event times, plus the dyad/condition it belongs to.
struct TrialRecord {
  std::string trial_id;
  std::string dyad_id;
  Channel s1;        // N
  Channel s2;        // N
  Channel position;  // m
  std::vector<double> beats;  // event times (s), strictly increasing
  TrialCondition condition;
};

// Per-dyad configuration resolved from the session manifest.
struct DyadConfig {
  std::string dyad_id;
  DyadMasses masses;  // m1/m2 may be <= 0 when body mass + sex are given instead
  std::string role_a;
  std::string role_b;
  // Optional anthropometric route: arm mass = body mass x segment fractions.
  double body_mass_a_kg = 0.0;
  double body_mass_b_kg = 0.0;
  std::string sex_a;
  std::string sex_b;
};

void validate_trial(const TrialRecord& t);

}  // namespace dyadflow
