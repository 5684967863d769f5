#pragma once

#include <vector>

#include "dyadflow/channel.hpp"

namespace dyadflow {

// Anthropometry and device constants for one dyad. m1/m2 are the effective
// hand+forearm masses of participants A and B; M is the moving slider mass.
struct DyadMasses {
  double m1 = 0.0;
  double m2 = 0.0;
  double M = 0.0;
};

struct ForcePair {
  Channel f1;            // participant A applied force (N)
  Channel f2;            // participant B applied force (N)
  Channel acceleration;  // shared object acceleration (m/s^2)
};

// Per-participant applied forces from the two sensor series:
//   a  = (s2 - s1) / M
//   f2 = m2 * a + s2
//   f1 = m1 * a - s1
ForcePair reconstruct_forces(const Channel& s1, const Channel& s2, const DyadMasses& m);

// Exact inverse of reconstruct_forces (sensor readings from applied forces):
//   a  = (f1 + f2) / (m1 + m2 + M)
//   s2 = f2 - m2 * a
//   s1 = m1 * a - f1
struct SensorPair {
  Channel s1;
  Channel s2;
  Channel acceleration;
};
SensorPair invert_forces(const Channel& f1, const Channel& f2, const DyadMasses& m);

// Effective arm mass = body_mass * (hand + forearm fraction) for the sex row
// of the segment coefficient table (lowercase "male"/"female").
struct SegmentRow {
  std::string segment;
  std::string sex;
  double mass_fraction = 0.0;
};
std::vector<SegmentRow> load_segment_coefficients(const std::string& csv_path);
double effective_arm_mass(double body_mass_kg, const std::string& sex,
                          const std::vector<SegmentRow>& table);

}  // namespace dyadflow
