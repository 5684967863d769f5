#pragma once

#include <span>
#include <string>
#include <vector>

namespace dyadflow {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df = 0.0;        // 0 when the test has no df concept
  int n = 0;              // total observations used
  std::string method;     // e.g. "t-two-sample", "rank-sum-exact"
};

// Shapiro-Wilk normality test (Royston's AS R94 approximation), 3 <= n <= 5000.
struct ShapiroResult {
  double w = 0.0;
  double p_value = 1.0;
};
ShapiroResult shapiro_wilk(std::span<const double> x);

// Two-sided t tests. Two-sample defaults to the pooled equal-variance form
// (df = n + m - 2); Welch's unequal-variance correction sits behind a flag.
TestResult t_test_one_sample(std::span<const double> x, double mu0 = 0.0);
TestResult t_test_paired(std::span<const double> x, std::span<const double> y);
TestResult t_test_two_sample(std::span<const double> x, std::span<const double> y,
                             bool welch = false);

// Wilcoxon rank-sum (W = midrank sum of the first sample): exact two-sided p
// by distribution enumeration when min(n, m) <= 10, otherwise normal
// approximation with tie and continuity corrections.
TestResult rank_sum(std::span<const double> x, std::span<const double> y);

// Wilcoxon signed-rank (W = positive-rank sum, zero differences dropped):
// exact sign enumeration when n <= 12, else corrected normal approximation.
TestResult signed_rank(std::span<const double> x, std::span<const double> y);
TestResult signed_rank_one_sample(std::span<const double> diff);

// Two-sample Kolmogorov-Smirnov: D = sup |ECDF difference|, p from the
// asymptotic Kolmogorov distribution at sqrt(n*m/(n+m)) * D.
TestResult ks_two_sample(std::span<const double> x, std::span<const double> y);

// Pearson correlation with two-sided p from t = r*sqrt((n-2)/(1-r^2)).
struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;
  int n = 0;
};
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

// Normality-gated comparison: t test when Shapiro p > alpha for both inputs,
// rank test otherwise (paired variant: paired t vs signed-rank). `route`
// records which branch fired.
struct GatedResult {
  TestResult test;
  ShapiroResult shapiro_x;
  ShapiroResult shapiro_y;
  std::string route;  // "parametric" | "nonparametric"
};
GatedResult gated_compare(std::span<const double> x, std::span<const double> y,
                          bool paired = false, double alpha = 0.05);

// Midrank helper shared by the rank tests (average ranks for ties).
std::vector<double> midranks(std::span<const double> v);

}  // namespace dyadflow
