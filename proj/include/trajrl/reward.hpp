#pragma once

#include <optional>

#include "trajrl/geom.hpp"

namespace trajrl::reward {

struct RewardConfig {
  double r_time = -0.01;     // constant time penalty
  double r_prox_max = 0.5;   // proximity scale
  double tau_dist = 0.02;    // distance threshold, normalized units
  std::optional<double> clamp_prox_at;  // optional floor; off by default
};

struct RewardBreakdown {
  double time = 0.0;
  double prox = 0.0;
  double term = 0.0;
  double total = 0.0;
  double d_k = 0.0;  // distance to the dense reference, normalized units
  double w_k = 0.0;  // confidence weight
};

// 1.0 for annotated keyframes; 0.5 + 0.5 * confidence for interpolated ones.
double confidence_weight(bool is_keyframe, double confidence);

// Time penalty + confidence-weighted proximity + terminal shaping (final
// step only). The proximity term is linear in distance and unclamped unless
// cfg.clamp_prox_at is set.
RewardBreakdown step_reward(const geom::PixelPoint& pred,
                            const geom::DenseSample& ref, bool is_final,
                            const RewardConfig& cfg = {});

}  // namespace trajrl::reward
