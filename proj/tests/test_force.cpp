#include <cmath>
#include <vector>

#include "doctest.h"
#include "dyadflow/force.hpp"
#include "dyadflow/rng.hpp"
#include "helpers.hpp"

using namespace dyadflow;

namespace {
const DyadMasses kStd{2.0, 2.0, 16.5};

Channel ch(std::vector<double> v, double fs = 500.0) { return make_channel(std::move(v), fs); }
}  // namespace

TEST_CASE("reconstruct: equal constant sensor readings mean zero acceleration") {
  const double c = 4.2;
  const auto fp = reconstruct_forces(ch({c, c, c}), ch({c, c, c}), kStd);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(fp.acceleration.samples[i] == doctest::Approx(0.0));
    CHECK(fp.f2.samples[i] == doctest::Approx(c));
    CHECK(fp.f1.samples[i] == doctest::Approx(-c));
  }
}

TEST_CASE("reconstruct: direct substitution example") {
  // s1 = 0, s2 = 16.5 N, M = 16.5 kg, m1 = m2 = 2 kg
  const auto fp = reconstruct_forces(ch({0.0}), ch({16.5}), kStd);
  CHECK(fp.acceleration.samples[0] == doctest::Approx(1.0));
  CHECK(fp.f2.samples[0] == doctest::Approx(18.5));
  CHECK(fp.f1.samples[0] == doctest::Approx(2.0));
}

TEST_CASE("reconstruct: zeros map to zeros") {
  const auto fp = reconstruct_forces(ch({0.0, 0.0}), ch({0.0, 0.0}), kStd);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(fp.f1.samples[i] == 0.0);
    CHECK(fp.f2.samples[i] == 0.0);
    CHECK(fp.acceleration.samples[i] == 0.0);
  }
}

TEST_CASE("invert: antisymmetric constant forces give equal sensor readings") {
  const double c = 3.3;
  const auto sp = invert_forces(ch({-c, -c}), ch({c, c}), kStd);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(sp.acceleration.samples[i] == doctest::Approx(0.0));
    CHECK(sp.s1.samples[i] == doctest::Approx(c));
    CHECK(sp.s2.samples[i] == doctest::Approx(c));
  }
  const auto sp0 = invert_forces(ch({0.0}), ch({0.0}), kStd);
  CHECK(sp0.s1.samples[0] == 0.0);
  CHECK(sp0.s2.samples[0] == 0.0);
}

TEST_CASE("round trip exact to 1e-10 relative and Newton identity per sample") {
  Rng rng(2718);
  for (int rep = 0; rep < 20; ++rep) {
    const DyadMasses m{0.5 + 3.0 * rng.uniform01(), 0.5 + 3.0 * rng.uniform01(),
                       5.0 + 20.0 * rng.uniform01()};
    std::vector<double> s1(200), s2(200);
    for (size_t i = 0; i < s1.size(); ++i) {
      s1[i] = 50.0 * (rng.uniform01() - 0.5);
      s2[i] = 50.0 * (rng.uniform01() - 0.5);
    }
    const auto fp = reconstruct_forces(ch(s1), ch(s2), m);
    // Newton: F1 + F2 = (m1 + m2 + M) * a
    for (size_t i = 0; i < s1.size(); ++i) {
      const double lhs = fp.f1.samples[i] + fp.f2.samples[i];
      const double rhs = (m.m1 + m.m2 + m.M) * fp.acceleration.samples[i];
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
    const auto sp = invert_forces(fp.f1, fp.f2, m);
    for (size_t i = 0; i < s1.size(); ++i) {
      CHECK(std::abs(sp.s1.samples[i] - s1[i]) <= 1e-10 * std::max(1.0, std::abs(s1[i])));
      CHECK(std::abs(sp.s2.samples[i] - s2[i]) <= 1e-10 * std::max(1.0, std::abs(s2[i])));
    }
  }
}

TEST_CASE("round trip the other way: forces -> sensors -> forces") {
  Rng rng(137);
  std::vector<double> f1(100), f2(100);
  for (size_t i = 0; i < f1.size(); ++i) {
    f1[i] = 30.0 * (rng.uniform01() - 0.5);
    f2[i] = 30.0 * (rng.uniform01() - 0.5);
  }
  const auto sp = invert_forces(ch(f1), ch(f2), kStd);
  const auto fp = reconstruct_forces(sp.s1, sp.s2, kStd);
  for (size_t i = 0; i < f1.size(); ++i) {
    CHECK(std::abs(fp.f1.samples[i] - f1[i]) <= 1e-10 * std::max(1.0, std::abs(f1[i])));
    CHECK(std::abs(fp.f2.samples[i] - f2[i]) <= 1e-10 * std::max(1.0, std::abs(f2[i])));
  }
}

TEST_CASE("force model error codes") {
  CHECK_THROWS_WITH_AS(reconstruct_forces(ch({1.0}), ch({1.0}), DyadMasses{0.0, 2.0, 16.5}),
                       doctest::Contains("invalid-mass"), Error);
  CHECK_THROWS_WITH_AS(reconstruct_forces(ch({1.0, 2.0}), ch({1.0}), kStd),
                       doctest::Contains("channel-mismatch"), Error);
  CHECK_THROWS_WITH_AS(reconstruct_forces(ch({1.0}, 500.0), ch({1.0}, 250.0), kStd),
                       doctest::Contains("channel-mismatch"), Error);
}

TEST_CASE("effective arm mass: fraction arithmetic") {
  const std::vector<SegmentRow> table{{"hand", "male", 0.01}, {"forearm", "male", 0.02}};
  CHECK(effective_arm_mass(70.0, "male", table) == doctest::Approx(2.1).epsilon(1e-12));
}

TEST_CASE("effective arm mass: zero or out-of-range fraction rejected") {
  const std::vector<SegmentRow> bad{{"hand", "male", 0.0}, {"forearm", "male", 0.02}};
  CHECK_THROWS_WITH_AS(effective_arm_mass(70.0, "male", bad), doctest::Contains("config-error"),
                       Error);
  const std::vector<SegmentRow> missing{{"hand", "male", 0.01}, {"forearm", "male", 0.02}};
  CHECK_THROWS_WITH_AS(effective_arm_mass(70.0, "female", missing),
                       doctest::Contains("config-error"), Error);
}

TEST_CASE("bundled coefficient table matches the published segment fractions") {
  const auto table = load_segment_coefficients(testutil::repo_file("data/segment_coefficients.csv"));
  // Published adult segment mass fractions (de Leva 1996, Table 4):
  // hand 0.61% / forearm 1.62% (male); hand 0.56% / forearm 1.38% (female).
  CHECK(effective_arm_mass(100.0, "male", table) == doctest::Approx(2.23).epsilon(1e-9));
  CHECK(effective_arm_mass(100.0, "female", table) == doctest::Approx(1.94).epsilon(1e-9));
}
