#include "dyadflow/force.hpp"

#include <fstream>
#include <sstream>

namespace dyadflow {

namespace {

void check_masses(const DyadMasses& m) {
  if (m.m1 <= 0.0 || m.m2 <= 0.0 || m.M <= 0.0) {
    throw Error("invalid-mass", "all masses must be positive (m1 = " + std::to_string(m.m1) +
                                    ", m2 = " + std::to_string(m.m2) +
                                    ", M = " + std::to_string(m.M) + ")");
  }
}

void check_aligned(const Channel& a, const Channel& b) {
  if (a.samples.size() != b.samples.size() || a.fs != b.fs) {
    throw Error("channel-mismatch",
                "channels differ in length (" + std::to_string(a.samples.size()) + " vs " +
                    std::to_string(b.samples.size()) + ") or rate");
  }
}

}  // namespace

ForcePair reconstruct_forces(const Channel& s1, const Channel& s2, const DyadMasses& m) {
  check_masses(m);
  check_aligned(s1, s2);
  validate_channel(s1);
  validate_channel(s2);
  const size_t n = s1.samples.size();
  ForcePair out;
  out.f1 = {std::vector<double>(n), s1.fs, "f1"};
  out.f2 = {std::vector<double>(n), s1.fs, "f2"};
  out.acceleration = {std::vector<double>(n), s1.fs, "a"};
  for (size_t i = 0; i < n; ++i) {
    const double a = (s2.samples[i] - s1.samples[i]) / m.M;
    out.acceleration.samples[i] = a;
    out.f2.samples[i] = m.m2 * a + s2.samples[i];
    out.f1.samples[i] = m.m1 * a - s1.samples[i];
  }
  return out;
}

SensorPair invert_forces(const Channel& f1, const Channel& f2, const DyadMasses& m) {
  check_masses(m);
  check_aligned(f1, f2);
  validate_channel(f1);
  validate_channel(f2);
  const size_t n = f1.samples.size();
  SensorPair out;
  out.s1 = {std::vector<double>(n), f1.fs, "s1"};
  out.s2 = {std::vector<double>(n), f1.fs, "s2"};
  out.acceleration = {std::vector<double>(n), f1.fs, "a"};
  const double total = m.m1 + m.m2 + m.M;
  for (size_t i = 0; i < n; ++i) {
    const double a = (f1.samples[i] + f2.samples[i]) / total;
    out.acceleration.samples[i] = a;
    out.s2.samples[i] = f2.samples[i] - m.m2 * a;
    out.s1.samples[i] = m.m1 * a - f1.samples[i];
  }
  return out;
}

std::vector<SegmentRow> load_segment_coefficients(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error("config-error", "cannot open coefficient table " + csv_path);
  std::vector<SegmentRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("segment", 0) == 0) continue;  // header
    std::istringstream ss(line);
    SegmentRow r;
    std::string frac;
    if (!std::getline(ss, r.segment, ',') || !std::getline(ss, r.sex, ',') ||
        !std::getline(ss, frac)) {
      throw Error("config-error",
                  csv_path + ":" + std::to_string(lineno) + ": expected segment,sex,mass_fraction");
    }
    try {
      r.mass_fraction = std::stod(frac);
    } catch (const std::exception&) {
      throw Error("config-error",
                  csv_path + ":" + std::to_string(lineno) + ": bad mass_fraction '" + frac + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

double effective_arm_mass(double body_mass_kg, const std::string& sex,
                          const std::vector<SegmentRow>& table) {
  if (body_mass_kg <= 0.0) throw Error("invalid-mass", "body mass must be positive");
  double fraction = 0.0;
  bool have_hand = false;
  bool have_forearm = false;
  for (const SegmentRow& r : table) {
    if (r.sex != sex) continue;
    if (r.segment != "hand" && r.segment != "forearm") continue;
    if (r.mass_fraction <= 0.0 || r.mass_fraction >= 1.0) {
      throw Error("config-error", "mass fraction for " + r.segment + "/" + r.sex +
                                      " must lie in (0, 1), got " +
                                      std::to_string(r.mass_fraction));
    }
    fraction += r.mass_fraction;
    (r.segment == "hand" ? have_hand : have_forearm) = true;
  }
  if (!have_hand || !have_forearm) {
    throw Error("config-error", "coefficient table has no hand+forearm entries for sex '" + sex +
                                    "'");
  }
  return body_mass_kg * fraction;
}

}  // namespace dyadflow
