#include "dyadflow/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dyadflow {

std::vector<SurrogatePair> draw_surrogate_pairs(std::vector<IndividualSeries>& pool, int n_pairs,
                                                Rng& rng) {
  std::sort(pool.begin(), pool.end(), [](const IndividualSeries& a, const IndividualSeries& b) {
    return a.individual_id < b.individual_id;
  });
  std::set<std::string> dyads;
  for (const auto& p : pool) dyads.insert(p.dyad_id);
  if (pool.size() < 2 || dyads.size() < 2) {
    throw Error("insufficient-pool", "need >= 2 individuals from >= 2 distinct dyads");
  }
  std::vector<SurrogatePair> pairs;
  pairs.reserve(static_cast<size_t>(n_pairs));
  std::vector<int> idx(pool.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  // Each round is one random disjoint matching; same-dyad draws are skipped
  // (cross-dyad pairs only) and rounds repeat until the quota is filled.
  while (pairs.size() < static_cast<size_t>(n_pairs)) {
    rng.shuffle(std::span<int>(idx));
    for (size_t i = 0; i + 1 < idx.size() && pairs.size() < static_cast<size_t>(n_pairs); i += 2) {
      const auto& a = pool[static_cast<size_t>(idx[i])];
      const auto& b = pool[static_cast<size_t>(idx[i + 1])];
      if (a.dyad_id == b.dyad_id) continue;
      pairs.push_back({idx[i], idx[i + 1]});
    }
  }
  return pairs;
}

namespace {

std::vector<Epoch> sorted_epochs(const IndividualSeries& s) {
  std::vector<Epoch> e = s.epochs;
  std::stable_sort(e.begin(), e.end(), [](const Epoch& x, const Epoch& y) {
    if (x.parent_trial != y.parent_trial) return x.parent_trial < y.parent_trial;
    return x.window_index < y.window_index;
  });
  return e;
}

}  // namespace

SurrogateEnsemble surrogate_ensemble(std::vector<IndividualSeries> pool, int n_perm,
                                     uint64_t seed, const GgcOptions& opt) {
  if (n_perm < 1) throw Error("insufficient-pool", "n_perm must be >= 1");
  Rng rng(seed);
  SurrogateEnsemble ens;
  ens.n_perm = n_perm;
  ens.seed = seed;
  // A degenerate pairing (e.g. two strongly rhythmic non-partners whose
  // pooled fit lands marginally outside the stationarity region) is skipped
  // and replaced by a further draw so that one bad pairing cannot abort the
  // whole null ensemble.  Skips are counted in n_skipped; a skip rate above
  // half the attempts aborts, since such a null would not be trustworthy.
  int attempts = 0;
  while (ens.curves.size() < static_cast<size_t>(n_perm)) {
    const int missing = n_perm - static_cast<int>(ens.curves.size());
    const auto pairs = draw_surrogate_pairs(pool, missing, rng);
    for (const SurrogatePair& pr : pairs) {
      ++attempts;
      int first = pr.first;
      int second = pr.second;
      // One directional curve per surrogate pair; the orientation is a coin
      // flip so neither slot is systematically the source.
      if (rng.bounded(2) == 1) std::swap(first, second);
      const auto ea = sorted_epochs(pool[static_cast<size_t>(first)]);
      const auto eb = sorted_epochs(pool[static_cast<size_t>(second)]);
      const size_t n_ep = std::min(ea.size(), eb.size());
      if (n_ep == 0) throw Error("insufficient-pool", "surrogate member has no epochs");
      std::vector<EpochPair> eps;
      eps.reserve(n_ep);
      for (size_t k = 0; k < n_ep; ++k) eps.push_back({ea[k], eb[k]});
      try {
        GgcResult r = ggc_from_epochs(eps, opt);
        if (ens.freqs.empty()) ens.freqs = r.spectrum.freqs;
        ens.curves.push_back(std::move(r.spectrum.a_to_b));
      } catch (const Error& e) {
        if (e.code() != "non-invertible") throw;
        ++ens.n_skipped;
      }
    }
    if (attempts >= 2 * n_perm && 2 * ens.n_skipped > attempts) {
      throw Error("insufficient-pool", "surrogate fits unstable for " +
                                           std::to_string(ens.n_skipped) + " of " +
                                           std::to_string(attempts) + " draws");
    }
  }
  return ens;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("insufficient-pool", "percentile of empty set");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - std::floor(h);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

ThresholdCurve threshold_from_ensemble(const SurrogateEnsemble& e, double q) {
  if (e.curves.empty()) throw Error("insufficient-pool", "empty surrogate ensemble");
  ThresholdCurve t;
  t.freqs = e.freqs;
  t.n_perm = e.n_perm;
  t.seed = e.seed;
  t.q99.resize(e.freqs.size());
  std::vector<double> bin(e.curves.size());
  for (size_t j = 0; j < e.freqs.size(); ++j) {
    for (size_t i = 0; i < e.curves.size(); ++i) bin[i] = e.curves[i][j];
    t.q99[j] = percentile(bin, q);
  }
  return t;
}

SignificanceMask significance_mask(const GgcSpectrum& spec, const ThresholdCurve& thr) {
  if (spec.freqs != thr.freqs) throw Error("grid-error", "spectrum and threshold grids differ");
  SignificanceMask m;
  m.a_to_b.resize(spec.freqs.size());
  m.b_to_a.resize(spec.freqs.size());
  for (size_t j = 0; j < spec.freqs.size(); ++j) {
    m.a_to_b[j] = spec.a_to_b[j] > thr.q99[j];
    m.b_to_a[j] = spec.b_to_a[j] > thr.q99[j];
  }
  return m;
}

}  // namespace dyadflow
