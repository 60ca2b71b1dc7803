#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trajrl/actions.hpp"
#include "trajrl/common.hpp"

using namespace trajrl;

TEST_CASE("unit vectors match the compass table") {
  auto u1 = actions::unit_vector(1);
  CHECK(u1[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(u1[1] == doctest::Approx(-1.0).epsilon(1e-12));
  auto u3 = actions::unit_vector(3);
  CHECK(u3[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u3[1] == doctest::Approx(0.0).epsilon(1e-12));
  auto u9 = actions::unit_vector(9);
  CHECK(u9[0] == 0.0);
  CHECK(u9[1] == 0.0);
  for (int a = 1; a <= 8; ++a) {
    const auto u = actions::unit_vector(a);
    CHECK(std::abs(std::hypot(u[0], u[1]) - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(actions::unit_vector(0), actions::InvalidAction);
  CHECK_THROWS_AS(actions::unit_vector(10), actions::InvalidAction);
}

TEST_CASE("quantize_displacement matches a dot-product argmax oracle") {
  CHECK(actions::quantize_displacement(0.0, 0.0) == 9);
  CHECK(actions::quantize_displacement(0.02, 0.0) == 3);
  CHECK(actions::quantize_displacement(0.01, -0.01) == 2);

  Rng rng(11);
  for (int rep = 0; rep < 500; ++rep) {
    const double dx = rng.uniform(-0.1, 0.1);
    const double dy = rng.uniform(-0.1, 0.1);
    const int got = actions::quantize_displacement(dx, dy, 1e-4);
    if (std::hypot(dx, dy) < 1e-4) {
      CHECK(got == 9);
      continue;
    }
    int best = 1;
    double best_dot = -1e300;
    for (int a = 1; a <= 8; ++a) {
      const auto u = actions::unit_vector(a);
      const double dot = dx * u[0] + dy * u[1];
      if (dot > best_dot) {
        best_dot = dot;
        best = a;
      }
    }
    CHECK(got == best);
  }
}

TEST_CASE("quantize round-trips every direction") {
  Rng rng(12);
  for (int a = 1; a <= 8; ++a) {
    for (int rep = 0; rep < 10; ++rep) {
      const double c = rng.uniform(2e-4, 0.2);
      const auto u = actions::unit_vector(a);
      CHECK(actions::quantize_displacement(c * u[0], c * u[1], 1e-4) == a);
    }
  }
}

TEST_CASE("expected_direction examples") {
  std::vector<double> onehot5(9, 0.0);
  onehot5[4] = 1.0;
  auto d = actions::expected_direction(onehot5);
  CHECK(d[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d[1] == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> uniform8(9, 1.0 / 8.0);
  uniform8[8] = 0.0;
  d = actions::expected_direction(uniform8);
  CHECK(std::abs(d[0]) <= 1e-12);
  CHECK(std::abs(d[1]) <= 1e-12);

  std::vector<double> mix(9, 0.0);
  mix[0] = 0.5;
  mix[2] = 0.5;
  d = actions::expected_direction(mix);
  CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d[1] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("expected_direction rejects bad distributions") {
  std::vector<double> neg(9, 0.125);
  neg[8] = 0.0;
  neg[0] = -0.01;
  neg[1] = 0.26;
  CHECK_THROWS_AS(actions::expected_direction(neg),
                  actions::InvalidDistribution);
  std::vector<double> off(9, 0.2);
  CHECK_THROWS_AS(actions::expected_direction(off),
                  actions::InvalidDistribution);
}

TEST_CASE("expected_direction is linear in the probabilities") {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> p(9), q(9);
    double sp = 0, sq = 0;
    for (int i = 0; i < 9; ++i) {
      p[i] = rng.uniform(0, 1);
      q[i] = rng.uniform(0, 1);
      sp += p[i];
      sq += q[i];
    }
    for (int i = 0; i < 9; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    const double w = rng.uniform(0, 1);
    std::vector<double> mix(9);
    for (int i = 0; i < 9; ++i) mix[i] = w * p[i] + (1 - w) * q[i];
    const auto dm = actions::expected_direction(mix);
    const auto dp = actions::expected_direction(p);
    const auto dq = actions::expected_direction(q);
    CHECK(dm[0] == doctest::Approx(w * dp[0] + (1 - w) * dq[0]).epsilon(1e-12));
    CHECK(dm[1] == doctest::Approx(w * dp[1] + (1 - w) * dq[1]).epsilon(1e-12));
  }
}

TEST_CASE("step update and clipping") {
  std::vector<double> onehot3(9, 0.0);
  onehot3[2] = 1.0;
  auto p = actions::step({0.5, 0.5}, onehot3, 0.1);
  CHECK(p.x == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.5).epsilon(1e-12));

  p = actions::step({0.99, 0.5}, onehot3, 0.05);
  CHECK(p.x == 1.0);
  CHECK(p.y == doctest::Approx(0.5));

  std::vector<double> idle(9, 0.0);
  idle[8] = 1.0;
  p = actions::step({0.5, 0.5}, idle, 0.7);
  CHECK(p.x == 0.5);
  CHECK(p.y == 0.5);

  // a=1 moves toward smaller y (up, image coordinates).
  std::vector<double> onehot1(9, 0.0);
  onehot1[0] = 1.0;
  p = actions::step({0.5, 0.5}, onehot1, 0.1);
  CHECK(p.y < 0.5);
  CHECK(p.x == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("step output stays inside the unit square") {
  Rng rng(14);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> p(9);
    double s = 0;
    for (auto& x : p) {
      x = rng.uniform(0, 1);
      s += x;
    }
    for (auto& x : p) x /= s;
    const geom::PixelPoint start{rng.uniform(0, 1), rng.uniform(0, 1)};
    const double m = rng.uniform(0, 0.05);
    const auto out = actions::step(start, p, m);
    CHECK(out.x >= 0.0);
    CHECK(out.x <= 1.0);
    CHECK(out.y >= 0.0);
    CHECK(out.y <= 1.0);
    CHECK(geom::distance(start, out) <= m + 1e-12);
  }
}
