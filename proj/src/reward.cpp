#include "trajrl/reward.hpp"

#include <algorithm>

namespace trajrl::reward {

double confidence_weight(bool is_keyframe, double confidence) {
  if (is_keyframe) return 1.0;
  return 0.5 + 0.5 * confidence;
}

RewardBreakdown step_reward(const geom::PixelPoint& pred,
                            const geom::DenseSample& ref, bool is_final,
                            const RewardConfig& cfg) {
  RewardBreakdown r;
  r.d_k = geom::distance(pred, ref.point);
  r.w_k = confidence_weight(ref.is_keyframe, ref.confidence);
  double prox = r.w_k * cfg.r_prox_max * (1.0 - r.d_k / cfg.tau_dist);
  if (cfg.clamp_prox_at) prox = std::max(prox, *cfg.clamp_prox_at);
  r.time = cfg.r_time;
  r.prox = prox;
  r.term = is_final ? prox : 0.0;
  r.total = r.time + r.prox + r.term;
  return r;
}

}  // namespace trajrl::reward
