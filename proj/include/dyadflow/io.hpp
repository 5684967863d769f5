#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dyadflow/surrogate.hpp"
#include "dyadflow/trial.hpp"

namespace dyadflow {

// ---- trial CSV (header: t_s,s1_n,s2_n,pos_m,beat) ----
// Numeric cells are written with "%.17g" so a read-back is value-exact.
void write_trial_csv(const std::string& path, const TrialRecord& t);
// Reads samples and beat impulses; dyad/condition fields come from the
// session manifest, not the CSV. Parse failures name the row and column.
TrialRecord read_trial_csv(const std::string& path, double expected_fs_hz);

// ---- session manifest ("key = value" lines, # comments) ----
// Keys: fs_hz; dyad.<id>.{m1_kg,m2_kg,M_kg,role_a,role_b};
//       trial.<tid>.{dyad,file,target_distance_m,metronome_period_s}.
struct SessionManifest {
  double fs_hz = 0.0;
  std::vector<DyadConfig> dyads;
  struct TrialEntry {
    std::string trial_id;
    std::string dyad_id;
    std::string file;  // relative to the manifest directory
    double target_distance_m = 0.0;
    double metronome_period_s = 0.0;
  };
  std::vector<TrialEntry> trials;
};
SessionManifest read_session_manifest(const std::string& path);
void write_session_manifest(const std::string& path, const SessionManifest& m);

// Loads every trial listed in the manifest, attaching dyad and condition
// metadata. Trials are returned in manifest order.
std::vector<TrialRecord> load_session(const std::string& manifest_path);

// ---- threshold CSV (freq_hz,q99,n_perm,seed) ----
void write_threshold_csv(const std::string& path, const ThresholdCurve& t);
ThresholdCurve read_threshold_csv(const std::string& path);

// ---- generic helpers ----
std::string format_double(double v);  // "%.17g"
double parse_double(const std::string& s, const std::string& context);
// Raw key = value parser preserving insertion order.
std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path);

// FNV-1a 64-bit over a file's bytes / a string; used for provenance hashes
// and fixture digests.
uint64_t fnv1a64(const std::string& bytes);
uint64_t fnv1a64_file(const std::string& path);

}  // namespace dyadflow
