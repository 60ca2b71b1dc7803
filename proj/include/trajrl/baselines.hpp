#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trajrl/encoders.hpp"
#include "trajrl/rollout.hpp"

namespace trajrl::baselines {

// Non-learned reference: the predictions are the pseudo-guidance points
// themselves (polynomial extrapolation per predicted frame).
rollout::Rollout straightline_baseline(
    std::span<const rollout::ObservedPoint> observed,
    std::span<const int> pred_frames, const rollout::GuidanceConfig& cfg = {});

struct BcConfig {
  double lr = 3e-4;
  int epochs = 60;
  int batch_size = 8;
  int head_hidden = 128;
};

// Behavioral-cloning regressor: the shared observation encoder plus a head
// that regresses each future waypoint's offset from the last observed point,
// trained with squared error.
class BcBaseline {
 public:
  BcBaseline() = default;
  BcBaseline(const encoders::EncoderConfig& enc_cfg, const BcConfig& cfg,
             std::uint64_t seed);

  // episodes/clips index-aligned, as for the main trainer.
  void train(std::span<const dataset::Episode> episodes,
             std::span<const encoders::ObservationClip> clips);

  rollout::Rollout predict(const encoders::ObservationClip& clip,
                           const geom::PixelPoint& last_observed,
                           int horizon) const;

  double last_train_loss() const { return last_loss_; }

  void collect_params(nn::ParamList& out) const;
  int64_t epochs_trained() const { return epochs_trained_; }
  void set_epochs_trained(int64_t n) { epochs_trained_ = n; }

 private:
  nn::Tensor step_offset(const nn::Tensor& z, const geom::PixelPoint& p0,
                         int k, int horizon) const;

  encoders::EncoderConfig enc_cfg_;
  BcConfig cfg_;
  std::uint64_t seed_ = 0;
  encoders::ObservationEncoder obs_enc_;
  nn::Linear proj_p_;
  nn::Linear proj_prog_;
  nn::MLP head_;
  double last_loss_ = 0.0;
  int64_t epochs_trained_ = 0;
};

}  // namespace trajrl::baselines
