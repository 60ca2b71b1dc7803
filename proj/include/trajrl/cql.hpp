#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajrl/actions.hpp"
#include "trajrl/checkpoint.hpp"
#include "trajrl/dataset.hpp"
#include "trajrl/encoders.hpp"
#include "trajrl/layers.hpp"
#include "trajrl/metrics.hpp"

namespace trajrl::cql {

struct EmptyBatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct UntrainedModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double alpha_cql = 0.01;     // conservative penalty weight
  double gamma = 0.95;         // discount
  double tau_soft = 0.005;     // target soft-update rate
  double alpha_entropy = 0.2;  // entropy temperature
  double lambda_mag = 1.0;     // magnitude loss weight
  double bc_weight = 1.0;      // behavior-cloning weight next to the policy loss
  double lr_encoder = 1e-4;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  double lr_mag = 3e-4;
  int epochs = 100;
  int batch_size = 8;
  int max_transitions_per_update = 2048;
  int head_hidden = 128;
  std::vector<int> bucket_boundaries = {4, 8, 16, 32};
};

struct LossReport {
  double critic1 = 0.0, critic2 = 0.0;  // Bellman terms
  double cql_penalty = 0.0;             // alpha-scaled, mean over both heads
  double policy = 0.0, bc = 0.0, magnitude = 0.0;
  double critic1_total = 0.0, critic2_total = 0.0;
  long clamped_magnitude_targets = 0;
  int updates = 0;
};

// Policy, twin critics with lagged targets, magnitude head, and the shared
// observation/state encoders.
struct PolicyModel {
  encoders::EncoderConfig enc_cfg;
  actions::ActionConfig action_cfg;
  encoders::ObservationEncoder obs_enc;
  encoders::StateEncoder state_enc;
  nn::MLP actor, magnitude;
  nn::MLP q1, q2, q1_tgt, q2_tgt;
  std::int64_t epochs_trained = 0;

  static PolicyModel create(const encoders::EncoderConfig& enc_cfg,
                            const actions::ActionConfig& action_cfg,
                            const TrainConfig& cfg, std::uint64_t seed);

  nn::Tensor policy_logits(const nn::Tensor& s) const { return actor(s); }
  // Step length in [0, delta_max] via a tanh squash of the head output.
  nn::Tensor magnitude_of(const nn::Tensor& s) const;

  nn::ParamList encoder_params() const;      // both encoders (routing contract)
  nn::ParamList obs_encoder_params() const;  // vision stack only
  nn::ParamList actor_params() const;
  nn::ParamList policy_group_params() const;  // state encoder + actor head
  nn::ParamList critic_params() const;
  nn::ParamList target_params() const;
  nn::ParamList magnitude_params() const;
  nn::ParamList all_params() const;

  void sync_targets();  // hard copy online -> target
};

// One transition with its encoded states. s_det and s_next_det are detached
// constants; s_live routes gradients into the encoders.
struct EncodedTransition {
  const dataset::Transition* tr = nullptr;
  nn::Tensor s_live;
  nn::Tensor s_det;
  nn::Tensor s_next_det;  // undefined when done
};

struct CriticLossResult {
  nn::Tensor loss1, loss2;  // per-head totals (Bellman + penalty)
  double bellman1 = 0.0, bellman2 = 0.0;
  double penalty = 0.0;  // alpha-scaled, mean over heads
};

// Eq-style CQL critic loss: mean squared Bellman error against
// y = r + gamma * (1 - d) * V(s') with V from the target heads and the
// entropy term, plus the conservative logsumexp penalty.
CriticLossResult critic_loss(std::span<const EncodedTransition> batch,
                             const PolicyModel& model, const TrainConfig& cfg);

// Entropy-regularized policy objective against the pessimistic critic,
// Q-values treated as constants.
nn::Tensor policy_loss(std::span<const EncodedTransition> batch,
                       const PolicyModel& model, const TrainConfig& cfg);

// Mean cross-entropy between policy logits and the expert action.
nn::Tensor bc_loss(std::span<const EncodedTransition> batch,
                   const PolicyModel& model);

// Squared error between the policy step length |m * d| and the expert step
// length; the expected-direction norm uses detached probabilities. Targets
// exceeding delta_max are clamped and counted.
nn::Tensor magnitude_loss(std::span<const EncodedTransition> batch,
                          const PolicyModel& model, const TrainConfig& cfg,
                          long* clamp_counter = nullptr);

// Offline trainer over prebuilt episodes and clips (index-aligned).
class Trainer {
 public:
  Trainer(PolicyModel& model, std::vector<dataset::Episode> episodes,
          std::vector<encoders::ObservationClip> clips, TrainConfig cfg,
          std::uint64_t seed);

  LossReport train_epoch(int epoch);
  const TrainConfig& config() const { return cfg_; }

  const nn::Adam& opt_encoder() const { return opt_encoder_; }
  const nn::Adam& opt_actor() const { return opt_actor_; }
  const nn::Adam& opt_critic() const { return opt_critic_; }
  const nn::Adam& opt_mag() const { return opt_mag_; }
  void restore_optimizers(const nn::Checkpoint& ckpt);

 private:
  PolicyModel& model_;
  std::vector<dataset::Episode> episodes_;
  std::vector<encoders::ObservationClip> clips_;
  TrainConfig cfg_;
  std::uint64_t seed_;
  dataset::BatchSampler sampler_;
  nn::Adam opt_encoder_, opt_actor_, opt_critic_, opt_mag_;
};

// Per-step pessimistic Q values of the policy's action vs the expert's
// along one episode; requires a trained model.
metrics::QCurve compute_qcurve(const dataset::Episode& episode,
                               const encoders::ObservationClip& clip,
                               const PolicyModel& model);

// Checkpoint plumbing (parameters + the four optimizer states).
nn::Checkpoint make_checkpoint(const PolicyModel& model, const Trainer* trainer,
                               std::uint64_t config_hash);
void restore_model(PolicyModel& model, const nn::Checkpoint& ckpt);

}  // namespace trajrl::cql
