#include "dyadflow/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dyadflow/channel.hpp"

namespace dyadflow {

namespace {

const boost::math::normal_distribution<double> kNormal(0.0, 1.0);

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

void require_finite(std::span<const double> v, const char* who) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error("non-finite-sample", std::string(who) + ": non-finite value");
  }
}

double two_sided_t_p(double t, double df) {
  const boost::math::students_t_distribution<double> dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(dist, -std::abs(t)));
}

double two_sided_z_p(double z) {
  return std::min(1.0, 2.0 * boost::math::cdf(kNormal, -std::abs(z)));
}

}  // namespace

std::vector<double> midranks(std::span<const double> v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// ---------------------------------------------------------------- t tests

TestResult t_test_one_sample(std::span<const double> x, double mu0) {
  if (x.size() < 2) throw Error("insufficient-samples", "one-sample t needs n >= 2");
  require_finite(x, "t-test");
  const double m = mean_of(x);
  const double v = sample_var(x, m);
  if (v <= 0.0) throw Error("degenerate-sample", "zero variance in one-sample t");
  TestResult r;
  r.method = "t-one-sample";
  r.n = static_cast<int>(x.size());
  r.df = static_cast<double>(x.size() - 1);
  r.statistic = (m - mu0) / std::sqrt(v / static_cast<double>(x.size()));
  r.p_value = two_sided_t_p(r.statistic, r.df);
  return r;
}

TestResult t_test_paired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("channel-mismatch", "paired t needs equal lengths");
  std::vector<double> d(x.size());
  for (size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  TestResult r = t_test_one_sample(d, 0.0);
  r.method = "t-paired";
  return r;
}

TestResult t_test_two_sample(std::span<const double> x, std::span<const double> y, bool welch) {
  if (x.size() < 2 || y.size() < 2) throw Error("insufficient-samples", "two-sample t needs n >= 2");
  require_finite(x, "t-test");
  require_finite(y, "t-test");
  const double mx = mean_of(x), my = mean_of(y);
  const double vx = sample_var(x, mx), vy = sample_var(y, my);
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  TestResult r;
  r.n = static_cast<int>(x.size() + y.size());
  if (welch) {
    if (vx <= 0.0 && vy <= 0.0) throw Error("degenerate-sample", "zero variance in both samples");
    const double se2 = vx / nx + vy / ny;
    r.method = "t-welch";
    r.statistic = (mx - my) / std::sqrt(se2);
    r.df = se2 * se2 /
           (vx * vx / (nx * nx * (nx - 1.0)) + vy * vy / (ny * ny * (ny - 1.0)));
  } else {
    const double pooled =
        ((nx - 1.0) * vx + (ny - 1.0) * vy) / (nx + ny - 2.0);
    if (pooled <= 0.0) throw Error("degenerate-sample", "zero pooled variance");
    r.method = "t-two-sample";
    r.df = nx + ny - 2.0;
    r.statistic = (mx - my) / std::sqrt(pooled * (1.0 / nx + 1.0 / ny));
  }
  r.p_value = two_sided_t_p(r.statistic, r.df);
  return r;
}

// ----------------------------------------------------------- rank-sum test

namespace {

// Null distribution of the doubled rank sum of the smaller-indexed sample:
// dist[s] = number of n-subsets of the doubled midranks summing to s.
// Conditioning on the observed midranks makes this identical to full
// enumeration of the C(n+m, n) assignments.
std::vector<std::vector<double>> ranksum_counts(const std::vector<int>& doubled, size_t n) {
  const int total = std::accumulate(doubled.begin(), doubled.end(), 0);
  std::vector<std::vector<double>> dp(n + 1, std::vector<double>(static_cast<size_t>(total) + 1, 0.0));
  dp[0][0] = 1.0;
  for (int item : doubled) {
    for (size_t k = std::min(n, dp.size() - 1); k >= 1; --k) {
      for (int s = total; s >= item; --s) {
        const double add = dp[k - 1][static_cast<size_t>(s - item)];
        if (add != 0.0) dp[k][static_cast<size_t>(s)] += add;
      }
    }
  }
  return dp;
}

double tie_term(const std::vector<double>& ranks) {
  // sum over tie groups of (t^3 - t), from midrank multiplicities
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    acc += t * t * t - t;
    i = j + 1;
  }
  return acc;
}

}  // namespace

TestResult rank_sum(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error("insufficient-samples", "rank-sum needs both samples");
  require_finite(x, "rank-sum");
  require_finite(y, "rank-sum");
  const size_t n = x.size(), m = y.size(), nm = n + m;
  std::vector<double> all(x.begin(), x.end());
  all.insert(all.end(), y.begin(), y.end());
  const std::vector<double> ranks = midranks(all);
  double w = 0.0;
  for (size_t i = 0; i < n; ++i) w += ranks[i];

  TestResult r;
  r.statistic = w;
  r.n = static_cast<int>(nm);
  // Exact branch runs the subset-sum distribution over the smaller sample
  // (identical two-sided p by W_x + W_y symmetry); the nm cap bounds the DP
  // table for a tiny sample paired with a huge one.
  if (std::min(n, m) <= 10 && nm <= 200) {
    std::vector<int> doubled(nm);
    for (size_t i = 0; i < nm; ++i) doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    const size_t small = std::min(n, m);
    const int tot2 = static_cast<int>(nm) * (static_cast<int>(nm) + 1);
    const int w2 = n <= m ? static_cast<int>(std::lround(2.0 * w))
                          : tot2 - static_cast<int>(std::lround(2.0 * w));
    const auto dp = ranksum_counts(doubled, small);
    const auto& dist = dp[small];
    double below = 0.0, above = 0.0, count = 0.0;
    for (int s = 0; s < static_cast<int>(dist.size()); ++s) {
      const double c = dist[static_cast<size_t>(s)];
      if (c == 0.0) continue;
      count += c;
      if (s <= w2) below += c;
      if (s >= w2) above += c;
    }
    r.method = "rank-sum-exact";
    r.p_value = std::min(1.0, 2.0 * std::min(below, above) / count);
  } else {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m),
                 big_n = static_cast<double>(nm);
    const double mu = nn * (big_n + 1.0) / 2.0;
    const double var = nn * mm * (big_n + 1.0) / 12.0 -
                       nn * mm * tie_term(ranks) / (12.0 * big_n * (big_n - 1.0));
    if (var <= 0.0) throw Error("degenerate-sample", "all values tied in rank-sum");
    const double diff = w - mu;
    const double corrected = diff - (diff > 0.0 ? 0.5 : diff < 0.0 ? -0.5 : 0.0);
    r.method = "rank-sum-approx";
    r.p_value = two_sided_z_p(corrected / std::sqrt(var));
  }
  return r;
}

// --------------------------------------------------------- signed-rank test

TestResult signed_rank_one_sample(std::span<const double> diff) {
  require_finite(diff, "signed-rank");
  std::vector<double> d;
  for (double v : diff) {
    if (v != 0.0) d.push_back(v);
  }
  if (d.empty()) throw Error("degenerate-sample", "all paired differences are zero");
  const size_t n = d.size();
  std::vector<double> absd(n);
  for (size_t i = 0; i < n; ++i) absd[i] = std::abs(d[i]);
  const std::vector<double> ranks = midranks(absd);
  double w_plus = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (d[i] > 0.0) w_plus += ranks[i];
  }

  TestResult r;
  r.statistic = w_plus;
  r.n = static_cast<int>(n);
  if (n <= 12) {
    // All 2^n sign assignments are equally likely under the null.
    const size_t total = size_t{1} << n;
    size_t below = 0, above = 0;
    for (size_t mask = 0; mask < total; ++mask) {
      double s = 0.0;
      for (size_t i = 0; i < n; ++i) {
        if (mask & (size_t{1} << i)) s += ranks[i];
      }
      if (s <= w_plus + 1e-9) ++below;
      if (s >= w_plus - 1e-9) ++above;
    }
    r.method = "signed-rank-exact";
    r.p_value = std::min(
        1.0, 2.0 * static_cast<double>(std::min(below, above)) / static_cast<double>(total));
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term(ranks) / 48.0;
    if (var <= 0.0) throw Error("degenerate-sample", "degenerate signed-rank variance");
    const double diff_w = w_plus - mu;
    const double corrected = diff_w - (diff_w > 0.0 ? 0.5 : diff_w < 0.0 ? -0.5 : 0.0);
    r.method = "signed-rank-approx";
    r.p_value = two_sided_z_p(corrected / std::sqrt(var));
  }
  return r;
}

TestResult signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("channel-mismatch", "signed-rank needs equal lengths");
  std::vector<double> d(x.size());
  for (size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return signed_rank_one_sample(d);
}

// ------------------------------------------------------------------ KS test

TestResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error("degenerate-sample", "KS needs both samples nonempty");
  require_finite(x, "ks");
  require_finite(y, "ks");
  std::vector<double> sx(x.begin(), x.end()), sy(y.begin(), y.end());
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());
  const double nx = static_cast<double>(sx.size()), ny = static_cast<double>(sy.size());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < sx.size() && j < sy.size()) {
    const double v = std::min(sx[i], sy[j]);
    while (i < sx.size() && sx[i] <= v) ++i;
    while (j < sy.size() && sy[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  TestResult r;
  r.method = "ks";
  r.n = static_cast<int>(sx.size() + sy.size());
  r.statistic = d;
  const double ne = nx * ny / (nx + ny);
  const double lambda = std::sqrt(ne) * d;
  if (lambda < 1e-3) {
    r.p_value = 1.0;
  } else {
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
      q += (k % 2 == 1 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
    }
    r.p_value = std::clamp(q, 0.0, 1.0);
  }
  return r;
}

// ----------------------------------------------------------------- Pearson

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("channel-mismatch", "pearson needs equal lengths");
  if (x.size() < 3) throw Error("insufficient-samples", "pearson needs n >= 3");
  require_finite(x, "pearson");
  require_finite(y, "pearson");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw Error("degenerate-sample", "zero variance in correlation");
  CorrelationResult r;
  r.n = static_cast<int>(x.size());
  r.r = sxy / std::sqrt(sxx * syy);
  const double df = static_cast<double>(r.n - 2);
  if (std::abs(r.r) >= 1.0) {
    r.p_value = 0.0;
  } else {
    const double t = r.r * std::sqrt(df / (1.0 - r.r * r.r));
    r.p_value = two_sided_t_p(t, df);
  }
  return r;
}

// ------------------------------------------------------------ Shapiro-Wilk

ShapiroResult shapiro_wilk(std::span<const double> x) {
  const size_t n = x.size();
  if (n < 3) throw Error("insufficient-samples", "Shapiro-Wilk needs n >= 3");
  if (n > 5000) throw Error("insufficient-samples", "Shapiro-Wilk limited to n <= 5000");
  require_finite(x, "shapiro");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  if (s.front() == s.back()) throw Error("degenerate-sample", "constant sample");

  // Royston (1995), AS R94: Blom scores with polynomial-corrected end
  // weights, then a normalizing transformation of W to an approximate z.
  const double dn = static_cast<double>(n);
  std::vector<double> mscore(n);
  double ssq_m = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mscore[i] =
        boost::math::quantile(kNormal, (static_cast<double>(i + 1) - 0.375) / (dn + 0.25));
    ssq_m += mscore[i] * mscore[i];
  }
  std::vector<double> a(n, 0.0);
  const double u = 1.0 / std::sqrt(dn);
  if (n == 3) {
    a[2] = std::sqrt(0.5);
    a[0] = -a[2];
  } else {
    const double rsqrt_ssq = 1.0 / std::sqrt(ssq_m);
    const double an = -2.706056 * std::pow(u, 5) + 4.434685 * std::pow(u, 4) -
                      2.071190 * std::pow(u, 3) - 0.147981 * u * u + 0.221157 * u +
                      mscore[n - 1] * rsqrt_ssq;
    double fi;
    if (n > 5) {
      const double an1 = -3.582633 * std::pow(u, 5) + 5.682633 * std::pow(u, 4) -
                         1.752461 * std::pow(u, 3) - 0.293762 * u * u + 0.042981 * u +
                         mscore[n - 2] * rsqrt_ssq;
      fi = (ssq_m - 2.0 * mscore[n - 1] * mscore[n - 1] - 2.0 * mscore[n - 2] * mscore[n - 2]) /
           (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      a[n - 1] = an;
      a[n - 2] = an1;
      a[0] = -an;
      a[1] = -an1;
      for (size_t i = 2; i < n - 2; ++i) a[i] = mscore[i] / std::sqrt(fi);
    } else {
      fi = (ssq_m - 2.0 * mscore[n - 1] * mscore[n - 1]) / (1.0 - 2.0 * an * an);
      a[n - 1] = an;
      a[0] = -an;
      for (size_t i = 1; i < n - 1; ++i) a[i] = mscore[i] / std::sqrt(fi);
    }
  }

  const double mean = mean_of(s);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += a[i] * s[i];
    den += (s[i] - mean) * (s[i] - mean);
  }
  if (den <= 0.0) throw Error("degenerate-sample", "constant sample");
  ShapiroResult res;
  res.w = std::clamp(num * num / den, 0.0, 1.0);

  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;    // 6/pi
    constexpr double stqr = 1.04719755119660;   // asin(sqrt(3/4))
    res.p_value = std::clamp(pi6 * (std::asin(std::sqrt(res.w)) - stqr), 0.0, 1.0);
    return res;
  }
  double zval;
  if (n <= 11) {
    const double gamma = -2.273 + 0.459 * dn;
    const double wt = -std::log(gamma - std::log1p(-res.w));
    const double mu = 0.5440 - 0.39978 * dn + 0.025054 * dn * dn - 0.0006714 * dn * dn * dn;
    const double sigma = std::exp(1.3822 - 0.77857 * dn + 0.062767 * dn * dn -
                                  0.0020322 * dn * dn * dn);
    zval = (wt - mu) / sigma;
  } else {
    const double lg = std::log(dn);
    const double wt = std::log1p(-res.w);
    const double mu = -1.5861 - 0.31082 * lg - 0.083751 * lg * lg + 0.0038915 * lg * lg * lg;
    const double sigma = std::exp(-0.4803 - 0.082676 * lg + 0.0030302 * lg * lg);
    zval = (wt - mu) / sigma;
  }
  res.p_value = 1.0 - boost::math::cdf(kNormal, zval);
  return res;
}

// ------------------------------------------------------------- gated route

GatedResult gated_compare(std::span<const double> x, std::span<const double> y, bool paired,
                          double alpha) {
  GatedResult g;
  g.shapiro_x = shapiro_wilk(x);
  g.shapiro_y = shapiro_wilk(y);
  const bool normal = g.shapiro_x.p_value > alpha && g.shapiro_y.p_value > alpha;
  g.route = normal ? "parametric" : "nonparametric";
  if (paired) {
    g.test = normal ? t_test_paired(x, y) : signed_rank(x, y);
  } else {
    g.test = normal ? t_test_two_sample(x, y) : rank_sum(x, y);
  }
  return g;
}

}  // namespace dyadflow
