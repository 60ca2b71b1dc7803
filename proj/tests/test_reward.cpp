#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "trajrl/common.hpp"
#include "trajrl/reward.hpp"

using namespace trajrl;

namespace {
geom::DenseSample ref_at(double x, double y, bool kf, double conf) {
  return {0, {x, y}, conf, kf};
}
}  // namespace

TEST_CASE("confidence weights") {
  CHECK(reward::confidence_weight(true, 0.0) == 1.0);
  CHECK(reward::confidence_weight(false, 0.9) == doctest::Approx(0.95));
  CHECK(reward::confidence_weight(false, 0.45) == doctest::Approx(0.725));
}

TEST_CASE("closed-form reward values") {
  const reward::RewardConfig cfg;
  // keyframe, d = 0, non-final
  auto r = reward::step_reward({0.5, 0.5}, ref_at(0.5, 0.5, true, 1.0), false,
                               cfg);
  CHECK(r.total == doctest::Approx(0.49).epsilon(1e-12));
  // keyframe, d = tau, non-final
  r = reward::step_reward({0.5 + 0.02, 0.5}, ref_at(0.5, 0.5, true, 1.0),
                          false, cfg);
  CHECK(r.total == doctest::Approx(-0.01).epsilon(1e-12));
  // keyframe, d = 0, final: terminal doubles the proximity term
  r = reward::step_reward({0.5, 0.5}, ref_at(0.5, 0.5, true, 1.0), true, cfg);
  CHECK(r.total == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("total decomposes and is consistent") {
  Rng rng(7);
  const reward::RewardConfig cfg;
  for (int rep = 0; rep < 100; ++rep) {
    const geom::PixelPoint pred{rng.uniform(0, 1), rng.uniform(0, 1)};
    const auto ref = ref_at(rng.uniform(0, 1), rng.uniform(0, 1),
                            rep % 3 == 0, rng.uniform(0.45, 0.9));
    const bool fin = rep % 2 == 0;
    const auto r = reward::step_reward(pred, ref, fin, cfg);
    CHECK(std::abs(r.total - (r.time + r.prox + r.term)) <= 1e-12);
    if (!fin) CHECK(r.term == 0.0);
    if (fin) CHECK(r.term == r.prox);
  }
}

TEST_CASE("total strictly decreases with distance") {
  const reward::RewardConfig cfg;
  double prev = 1e300;
  for (double d = 0.0; d <= 0.1; d += 0.005) {
    const auto r = reward::step_reward({0.5 + d, 0.5},
                                       ref_at(0.5, 0.5, false, 0.7), false,
                                       cfg);
    CHECK(r.total < prev);
    prev = r.total;
  }
}

TEST_CASE("higher confidence never hurts at fixed distance") {
  const reward::RewardConfig cfg;
  const double d = 0.01;  // inside tau, proximity positive
  double prev = -1e300;
  for (double c = 0.45; c <= 0.9; c += 0.05) {
    const auto r = reward::step_reward({0.5 + d, 0.5},
                                       ref_at(0.5, 0.5, false, c), false, cfg);
    CHECK(r.total >= prev);
    prev = r.total;
  }
}

TEST_CASE("at d = tau the total equals r_time regardless of weight") {
  const reward::RewardConfig cfg;
  for (bool kf : {true, false}) {
    for (bool fin : {true, false}) {
      const auto r = reward::step_reward(
          {0.3 + cfg.tau_dist, 0.4}, ref_at(0.3, 0.4, kf, 0.6), fin, cfg);
      CHECK(r.total == doctest::Approx(cfg.r_time).epsilon(1e-12));
    }
  }
}

TEST_CASE("proximity is unclamped by default but clamps when configured") {
  reward::RewardConfig cfg;
  const auto far = reward::step_reward({0.9, 0.9}, ref_at(0.1, 0.1, true, 1.0),
                                       false, cfg);
  CHECK(far.prox < 0.0);  // large distance drives the linear term negative

  cfg.clamp_prox_at = 0.0;
  const auto floored = reward::step_reward(
      {0.9, 0.9}, ref_at(0.1, 0.1, true, 1.0), false, cfg);
  CHECK(floored.prox == 0.0);
  CHECK(floored.total == doctest::Approx(cfg.r_time));
}
