#pragma once

#include <string>
#include <vector>

#include "dyadflow/ggc.hpp"
#include "dyadflow/rng.hpp"

namespace dyadflow {

// One individual's force epochs, detached from their real partner.
struct IndividualSeries {
  std::string individual_id;  // "<dyad>:a" / "<dyad>:b"
  std::string dyad_id;
  std::vector<Epoch> epochs;  // canonical (trial, window) order
};

struct SurrogatePair {
  int first = 0;   // indices into the canonically sorted pool
  int second = 0;
};

// Random disjoint pairings of pool members, rejecting any pair drawn from the
// same original dyad, repeated round-robin until n_pairs pairs are collected.
// The pool is sorted by individual_id first so results depend only on the
// seed and pool contents, not caller ordering.
std::vector<SurrogatePair> draw_surrogate_pairs(std::vector<IndividualSeries>& pool,
                                                int n_pairs, Rng& rng);

// Null influence curves: one directional curve per surrogate pair, with the
// (source, target) orientation coin-flipped per pair. Epochs are matched by
// (trial, window) position after canonical sorting; pairs whose epoch counts
// differ are trimmed to the shorter.
struct SurrogateEnsemble {
  std::vector<double> freqs;
  std::vector<std::vector<double>> curves;  // n_pairs x n_freqs
  int n_perm = 0;
  uint64_t seed = 0;
  // Draws whose pair fit fell outside the stationarity region and were
  // replaced by further draws (reported, never silently used).
  int n_skipped = 0;
};
SurrogateEnsemble surrogate_ensemble(std::vector<IndividualSeries> pool, int n_perm,
                                     uint64_t seed, const GgcOptions& opt);

// Per-bin 99th percentile with linear interpolation between order statistics
// (rank h = (n-1)*q).
struct ThresholdCurve {
  std::vector<double> freqs;
  std::vector<double> q99;
  int n_perm = 0;
  uint64_t seed = 0;
};
ThresholdCurve threshold_from_ensemble(const SurrogateEnsemble& e, double q = 0.99);

double percentile(std::vector<double> values, double q);

// Per-bin exceedance of a spectrum over the null threshold (grids must
// match bin for bin).
struct SignificanceMask {
  std::vector<bool> a_to_b;
  std::vector<bool> b_to_a;
};
SignificanceMask significance_mask(const GgcSpectrum& spec, const ThresholdCurve& thr);

}  // namespace dyadflow
