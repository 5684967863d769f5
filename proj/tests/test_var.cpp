#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dyadflow/rng.hpp"
#include "dyadflow/var.hpp"
#include "helpers.hpp"

using namespace dyadflow;

namespace {

VarModel make_var1(const Eigen::Matrix2d& a1, const Eigen::Matrix2d& sigma, double fs) {
  VarModel m;
  m.coeffs = {a1};
  m.sigma = sigma;
  m.order = 1;
  m.fs = fs;
  return m;
}

std::vector<EpochPair> epochs_from_series(const std::vector<double>& x,
                                          const std::vector<double>& y, double fs, int k,
                                          const std::string& trial = "t") {
  const size_t len = x.size() / static_cast<size_t>(k);
  std::vector<EpochPair> out;
  for (int w = 0; w < k; ++w) {
    Epoch a, b;
    a.fs = b.fs = fs;
    a.parent_trial = b.parent_trial = trial;
    a.window_index = b.window_index = w;
    const size_t off = static_cast<size_t>(w) * len;
    a.samples.assign(x.begin() + off, x.begin() + off + len);
    b.samples.assign(y.begin() + off, y.begin() + off + len);
    out.push_back({a, b});
  }
  return out;
}

}  // namespace

TEST_CASE("fit_var: white noise has near-zero coefficients, Sigma near sample covariance") {
  Rng rng(1001);
  const size_t n = 27 * 250;
  std::vector<double> x(n), y(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  const auto eps = epochs_from_series(x, y, 25.0, 27);
  const VarModel m = fit_var(eps, 1);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(std::abs(m.coeffs[0](i, j)) < 0.1);
  }
  // Sample covariance of the raw draws (the true innovations here).
  double sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  sxx /= static_cast<double>(n - 1);
  syy /= static_cast<double>(n - 1);
  CHECK(m.sigma(0, 0) == doctest::Approx(sxx).epsilon(0.10));
  CHECK(m.sigma(1, 1) == doctest::Approx(syy).epsilon(0.10));
}

TEST_CASE("fit_var: VAR(1) coefficients recovered within 0.02 at 1e5 samples") {
  Eigen::Matrix2d a1;
  a1 << 0.5, 0.0, 0.3, 0.4;
  const VarModel truth = make_var1(a1, Eigen::Matrix2d::Identity(), 25.0);
  Rng rng(2002);
  auto [x, y] = simulate_var(truth, 100000, rng);
  const auto eps = epochs_from_series(x, y, 25.0, 1);
  const VarModel m = fit_var(eps, 1);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(m.coeffs[0](i, j) - a1(i, j)) < 0.02);
    }
  }
  CHECK(std::abs(m.sigma(0, 0) - 1.0) < 0.05);
  CHECK(std::abs(m.sigma(1, 1) - 1.0) < 0.05);
  CHECK(is_stable(m));
}

TEST_CASE("fit_var: epoch shorter than the order floor is rejected") {
  std::vector<double> x(12, 0.5), y(12, -0.5);
  auto eps = epochs_from_series(x, y, 25.0, 1);
  CHECK_THROWS_WITH_AS(fit_var(eps, 5), doctest::Contains("insufficient-samples"), Error);
}

TEST_CASE("fit_var: collinear channels are rank-deficient") {
  Rng rng(7);
  std::vector<double> x(300);
  for (double& v : x) v = rng.normal();
  auto eps = epochs_from_series(x, x, 25.0, 1);
  CHECK_THROWS_WITH_AS(fit_var(eps, 2), doctest::Contains("rank-deficient"), Error);
}

TEST_CASE("fit_var: epoch order cannot change a single output bit") {
  Rng rng(31);
  std::vector<double> x(900), y(900);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = 0.3 * x[i] + rng.normal();
  }
  auto eps = epochs_from_series(x, y, 25.0, 3);
  const VarModel m1 = fit_var(eps, 2);
  std::swap(eps[0], eps[2]);
  std::swap(eps[1], eps[2]);
  const VarModel m2 = fit_var(eps, 2);
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(m1.coeffs[k](i, j) == m2.coeffs[k](i, j));  // bitwise
      }
    }
  }
  CHECK(m1.sigma(0, 0) == m2.sigma(0, 0));
  CHECK(m1.sigma(0, 1) == m2.sigma(0, 1));
  CHECK(m1.sigma(1, 1) == m2.sigma(1, 1));
}

TEST_CASE("select_order: strong lag-2 structure is never underfit") {
  Eigen::Matrix2d a1, a2;
  a1 << 0.1, 0.0, 0.0, 0.1;
  a2 << 0.6, 0.0, 0.2, 0.5;
  VarModel truth;
  truth.coeffs = {a1, a2};
  truth.sigma = Eigen::Matrix2d::Identity();
  truth.order = 2;
  truth.fs = 25.0;
  REQUIRE(is_stable(truth));
  // AIC overselects with nonvanishing probability but must not miss strong
  // lag-2 structure: order >= 2 always, exactly 2 in a clear majority.
  int exact = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    auto [x, y] = simulate_var(truth, 3000, rng);
    const auto eps = epochs_from_series(x, y, 25.0, 3);
    const int p = select_order(eps, 5);
    CHECK(p >= 2);
    CHECK(p <= 5);
    if (p == 2) ++exact;
  }
  CHECK(exact >= 7);  // observed: 8/10 exact, the rest overshoot to 4
}

TEST_CASE("select_order: white noise keeps the minimal order in >= 80% of seeds") {
  int hits = 0;
  for (uint64_t seed = 50; seed < 60; ++seed) {
    Rng rng(seed);
    std::vector<double> x(1500), y(1500);
    for (size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal();
    }
    const auto eps = epochs_from_series(x, y, 25.0, 3);
    if (select_order(eps, 5) == 1) ++hits;
  }
  CHECK(hits >= 8);
}

TEST_CASE("select_order: p_max = 1 returns 1") {
  Rng rng(5);
  std::vector<double> x(200), y(200);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  const auto eps = epochs_from_series(x, y, 25.0, 1);
  CHECK(select_order(eps, 1) == 1);
}

TEST_CASE("stability: spectral radius of the companion matrix") {
  Eigen::Matrix2d a1;
  a1 << 0.5, 0.0, 0.3, 0.4;
  const VarModel m = make_var1(a1, Eigen::Matrix2d::Identity(), 25.0);
  CHECK(companion_spectral_radius(m) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(is_stable(m));

  Eigen::Matrix2d bad;
  bad << 1.1, 0.0, 0.0, 0.2;
  CHECK_FALSE(is_stable(make_var1(bad, Eigen::Matrix2d::Identity(), 25.0)));
}

TEST_CASE("simulate_var: deterministic per seed, distinct across seeds") {
  Eigen::Matrix2d a1;
  a1 << 0.5, 0.0, 0.3, 0.4;
  const VarModel m = make_var1(a1, Eigen::Matrix2d::Identity(), 25.0);
  Rng r1(77), r2(77), r3(78);
  auto [x1, y1] = simulate_var(m, 500, r1);
  auto [x2, y2] = simulate_var(m, 500, r2);
  auto [x3, y3] = simulate_var(m, 500, r3);
  CHECK(x1 == x2);
  CHECK(y1 == y2);
  CHECK(x1 != x3);
}
