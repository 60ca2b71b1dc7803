#include "trajrl/cql.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trajrl/common.hpp"
#include "trajrl/optim.hpp"

namespace trajrl::cql {

using nn::Tensor;

namespace {

void softmax_values(const std::vector<double>& logits, std::vector<double>& p,
                    std::vector<double>& logp) {
  const int n = static_cast<int>(logits.size());
  p.resize(n);
  logp.resize(n);
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(logits[i] - mx);
  const double lse = mx + std::log(z);
  for (int i = 0; i < n; ++i) {
    logp[i] = logits[i] - lse;
    p[i] = std::exp(logp[i]);
  }
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

PolicyModel PolicyModel::create(const encoders::EncoderConfig& enc_cfg,
                                const actions::ActionConfig& action_cfg,
                                const TrainConfig& cfg, std::uint64_t seed) {
  PolicyModel m;
  m.enc_cfg = enc_cfg;
  m.action_cfg = action_cfg;
  Rng rng(derive_seed(seed, "model_init"));
  m.obs_enc = encoders::ObservationEncoder(enc_cfg, rng);
  m.state_enc = encoders::StateEncoder(enc_cfg, rng);
  const int s = enc_cfg.state_dim, h = cfg.head_hidden;
  m.actor.init(rng, s, h, actions::kNumActions, 0.01);
  m.magnitude.init(rng, s, h, 1, 0.01);
  m.q1.init(rng, s, h, actions::kNumActions, 0.01);
  m.q2.init(rng, s, h, actions::kNumActions, 0.01);
  m.q1_tgt.init(rng, s, h, actions::kNumActions, 0.01);
  m.q2_tgt.init(rng, s, h, actions::kNumActions, 0.01);
  m.sync_targets();
  for (auto& p : m.target_params()) p.tensor.set_requires_grad(false);
  return m;
}

Tensor PolicyModel::magnitude_of(const Tensor& s) const {
  Tensor z = magnitude(s);
  return nn::scale(nn::add_scalar(nn::tanh_op(z), 1.0),
                   0.5 * action_cfg.delta_max);
}

nn::ParamList PolicyModel::encoder_params() const {
  nn::ParamList out;
  obs_enc.collect(out, "obs_enc");
  state_enc.collect(out, "state_enc");
  return out;
}
nn::ParamList PolicyModel::obs_encoder_params() const {
  nn::ParamList out;
  obs_enc.collect(out, "obs_enc");
  return out;
}
nn::ParamList PolicyModel::actor_params() const {
  nn::ParamList out;
  actor.collect(out, "actor");
  return out;
}
nn::ParamList PolicyModel::policy_group_params() const {
  // The goal-conditioned state encoder trains with the actor group: it is
  // part of the policy trunk, while the slower encoder rate covers the
  // vision stack.
  nn::ParamList out;
  state_enc.collect(out, "state_enc");
  actor.collect(out, "actor");
  return out;
}
nn::ParamList PolicyModel::critic_params() const {
  nn::ParamList out;
  q1.collect(out, "q1");
  q2.collect(out, "q2");
  return out;
}
nn::ParamList PolicyModel::target_params() const {
  nn::ParamList out;
  q1_tgt.collect(out, "q1_tgt");
  q2_tgt.collect(out, "q2_tgt");
  return out;
}
nn::ParamList PolicyModel::magnitude_params() const {
  nn::ParamList out;
  magnitude.collect(out, "magnitude");
  return out;
}
nn::ParamList PolicyModel::all_params() const {
  nn::ParamList out = encoder_params();
  for (auto& p : actor_params()) out.push_back(p);
  for (auto& p : critic_params()) out.push_back(p);
  for (auto& p : target_params()) out.push_back(p);
  for (auto& p : magnitude_params()) out.push_back(p);
  return out;
}

void PolicyModel::sync_targets() {
  auto tgt = target_params();
  soft_update(tgt, critic_params(), 1.0);
}

CriticLossResult critic_loss(std::span<const EncodedTransition> batch,
                             const PolicyModel& model,
                             const TrainConfig& cfg) {
  if (batch.empty()) throw EmptyBatch("critic_loss: empty batch");
  std::vector<Tensor> bell1, bell2, pen1, pen2;
  bell1.reserve(batch.size());
  for (const auto& et : batch) {
    const auto& tr = *et.tr;
    double y = tr.reward.total;
    if (!tr.done) {
      // Soft value target from the lagged heads and the current policy.
      const auto q1t = model.q1_tgt(et.s_next_det).value();
      const auto q2t = model.q2_tgt(et.s_next_det).value();
      const auto logits = model.actor(et.s_next_det).value();
      std::vector<double> p, logp;
      softmax_values(logits, p, logp);
      double v = 0.0;
      for (int a = 0; a < actions::kNumActions; ++a)
        v += p[a] * (std::min(q1t[a], q2t[a]) - cfg.alpha_entropy * logp[a]);
      y += cfg.gamma * v;
    }
    const int col = tr.a_exp - 1;
    const Tensor q1v = model.q1(et.s_det);
    const Tensor q2v = model.q2(et.s_det);
    Tensor d1 = nn::add_scalar(nn::at(q1v, col), -y);
    Tensor d2 = nn::add_scalar(nn::at(q2v, col), -y);
    bell1.push_back(nn::mul(d1, d1));
    bell2.push_back(nn::mul(d2, d2));
    pen1.push_back(nn::sub(nn::logsumexp_rows(q1v), nn::at(q1v, col)));
    pen2.push_back(nn::sub(nn::logsumexp_rows(q2v), nn::at(q2v, col)));
  }
  CriticLossResult res;
  Tensor b1 = nn::mean_all(nn::stack_scalars(bell1));
  Tensor b2 = nn::mean_all(nn::stack_scalars(bell2));
  Tensor p1 = nn::scale(nn::mean_all(nn::stack_scalars(pen1)), cfg.alpha_cql);
  Tensor p2 = nn::scale(nn::mean_all(nn::stack_scalars(pen2)), cfg.alpha_cql);
  res.loss1 = nn::add(b1, p1);
  res.loss2 = nn::add(b2, p2);
  res.bellman1 = b1.item();
  res.bellman2 = b2.item();
  res.penalty = 0.5 * (p1.item() + p2.item());
  return res;
}

Tensor policy_loss(std::span<const EncodedTransition> batch,
                   const PolicyModel& model, const TrainConfig& cfg) {
  if (batch.empty()) throw EmptyBatch("policy_loss: empty batch");
  std::vector<Tensor> terms;
  terms.reserve(batch.size());
  for (const auto& et : batch) {
    // Pessimistic Q as a constant: the policy objective moves pi only.
    const auto q1v = model.q1(et.s_det).value();
    const auto q2v = model.q2(et.s_det).value();
    std::vector<double> qmin(actions::kNumActions);
    for (int a = 0; a < actions::kNumActions; ++a)
      qmin[a] = std::min(q1v[a], q2v[a]);
    Tensor qmin_t = Tensor::from({actions::kNumActions}, std::move(qmin));

    Tensor logits = model.actor(et.s_live);
    Tensor p = nn::softmax_rows(logits);
    Tensor logp = nn::log_softmax_rows(logits);
    terms.push_back(nn::sum_all(
        nn::mul(p, nn::sub(nn::scale(logp, cfg.alpha_entropy), qmin_t))));
  }
  return nn::mean_all(nn::stack_scalars(terms));
}

Tensor bc_loss(std::span<const EncodedTransition> batch,
               const PolicyModel& model) {
  if (batch.empty()) throw EmptyBatch("bc_loss: empty batch");
  std::vector<Tensor> terms;
  terms.reserve(batch.size());
  for (const auto& et : batch)
    terms.push_back(nn::cross_entropy_logits(model.actor(et.s_live),
                                             et.tr->a_exp - 1));
  return nn::mean_all(nn::stack_scalars(terms));
}

Tensor magnitude_loss(std::span<const EncodedTransition> batch,
                      const PolicyModel& model, const TrainConfig& cfg,
                      long* clamp_counter) {
  if (batch.empty()) throw EmptyBatch("magnitude_loss: empty batch");
  std::vector<Tensor> terms;
  terms.reserve(batch.size());
  for (const auto& et : batch) {
    // Direction mixing norm from detached probabilities; the magnitude head
    // and the encoder receive the gradient, the actor does not.
    std::vector<double> p, logp;
    softmax_values(model.actor(et.s_det).value(), p, logp);
    const auto dir = actions::expected_direction(p);
    const double dir_norm = std::hypot(dir[0], dir[1]);

    double target = et.tr->expert_len;
    if (target > model.action_cfg.delta_max) {
      target = model.action_cfg.delta_max;
      if (clamp_counter) ++*clamp_counter;
    }
    Tensor m = model.magnitude_of(et.s_live);
    Tensor err = nn::add_scalar(nn::scale(m, dir_norm), -target);
    terms.push_back(nn::mul(err, err));
  }
  return nn::scale(nn::mean_all(nn::stack_scalars(terms)), cfg.lambda_mag);
}

Trainer::Trainer(PolicyModel& model, std::vector<dataset::Episode> episodes,
                 std::vector<encoders::ObservationClip> clips, TrainConfig cfg,
                 std::uint64_t seed)
    : model_(model), episodes_(std::move(episodes)), clips_(std::move(clips)),
      cfg_(std::move(cfg)), seed_(seed),
      sampler_(dataset::make_buckets(episodes_, cfg_.bucket_boundaries),
               cfg_.batch_size, derive_seed(seed, "sampler")),
      opt_encoder_(model.obs_encoder_params()),
      opt_actor_(model.policy_group_params()),
      opt_critic_(model.critic_params()), opt_mag_(model.magnitude_params()) {
  if (episodes_.size() != clips_.size())
    throw std::invalid_argument("episodes and clips must align");
  if (!(cfg_.gamma > 0.0 && cfg_.gamma < 1.0))
    throw std::invalid_argument("gamma must lie in (0, 1)");
  if (cfg_.tau_soft <= 0.0 || cfg_.alpha_cql < 0.0 ||
      cfg_.alpha_entropy < 0.0 || cfg_.batch_size < 1 ||
      cfg_.max_transitions_per_update < 1)
    throw std::invalid_argument("invalid training configuration");
  if (!(model.action_cfg.delta_max > 0.0 && model.action_cfg.delta_max <= 1.0))
    throw std::invalid_argument("delta_max must lie in (0, 1]");
}

LossReport Trainer::train_epoch(int epoch) {
  LossReport rep;
  const double lr_e = nn::cosine_lr(cfg_.lr_encoder, epoch, cfg_.epochs);
  const double lr_a = nn::cosine_lr(cfg_.lr_actor, epoch, cfg_.epochs);
  const double lr_c = nn::cosine_lr(cfg_.lr_critic, epoch, cfg_.epochs);
  const double lr_m = nn::cosine_lr(cfg_.lr_mag, epoch, cfg_.epochs);

  const auto batches = sampler_.epoch_batches(epoch);
  int update_idx = 0;
  for (const auto& batch : batches) {
    std::vector<EncodedTransition> all;
    for (int ei : batch) {
      const auto& ep = episodes_[ei];
      Tensor z = model_.obs_enc.encode_clip(clips_[ei]);
      for (const auto& tr : ep.transitions) {
        EncodedTransition et;
        et.tr = &tr;
        et.s_live =
            model_.state_enc.encode_state(z, tr.p, tr.g, tr.k, tr.horizon);
        et.s_det = et.s_live.detach();
        if (!tr.done)
          et.s_next_det = model_.state_enc
                              .encode_state(z, tr.p_next, tr.g_next, tr.k + 1,
                                            tr.horizon)
                              .detach();
        all.push_back(std::move(et));
      }
    }

    // Critic update on detached states.
    opt_critic_.zero_grad();
    auto cl = critic_loss(all, model_, cfg_);
    nn::add(cl.loss1, cl.loss2).backward();
    opt_critic_.step(lr_c);

    // Policy and magnitude updates subsample large batches.
    std::vector<EncodedTransition> subsampled;
    std::span<const EncodedTransition> actor_batch(all);
    if (static_cast<int>(all.size()) > cfg_.max_transitions_per_update) {
      std::vector<int> idx(all.size());
      std::iota(idx.begin(), idx.end(), 0);
      Rng rng(derive_seed(seed_, "subsample",
                          static_cast<std::uint64_t>(epoch) * 1000003ULL +
                              update_idx));
      rng.shuffle(idx);
      idx.resize(cfg_.max_transitions_per_update);
      std::sort(idx.begin(), idx.end());
      for (int i : idx) subsampled.push_back(all[i]);
      actor_batch = subsampled;
    }

    opt_actor_.zero_grad();
    opt_mag_.zero_grad();
    opt_encoder_.zero_grad();
    Tensor pl = policy_loss(actor_batch, model_, cfg_);
    Tensor bl = bc_loss(actor_batch, model_);
    long clamps = 0;
    Tensor ml = magnitude_loss(actor_batch, model_, cfg_, &clamps);
    Tensor total = nn::add(nn::add(pl, nn::scale(bl, cfg_.bc_weight)), ml);
    total.backward();
    opt_actor_.step(lr_a);
    opt_mag_.step(lr_m);
    opt_encoder_.step(lr_e);

    auto tgt = model_.target_params();
    soft_update(tgt, model_.critic_params(), cfg_.tau_soft);

    rep.critic1 += cl.bellman1;
    rep.critic2 += cl.bellman2;
    rep.cql_penalty += cl.penalty;
    rep.critic1_total += cl.loss1.item();
    rep.critic2_total += cl.loss2.item();
    rep.policy += pl.item();
    rep.bc += bl.item();
    rep.magnitude += ml.item();
    rep.clamped_magnitude_targets += clamps;
    ++update_idx;
  }

  rep.updates = update_idx;
  if (update_idx > 0) {
    rep.critic1 /= update_idx;
    rep.critic2 /= update_idx;
    rep.cql_penalty /= update_idx;
    rep.critic1_total /= update_idx;
    rep.critic2_total /= update_idx;
    rep.policy /= update_idx;
    rep.bc /= update_idx;
    rep.magnitude /= update_idx;
  }
  ++model_.epochs_trained;
  return rep;
}

metrics::QCurve compute_qcurve(const dataset::Episode& episode,
                               const encoders::ObservationClip& clip,
                               const PolicyModel& model) {
  if (model.epochs_trained == 0)
    throw UntrainedModel("qcurve requires a trained checkpoint");
  metrics::QCurve qc;
  Tensor z = model.obs_enc.encode_clip(clip);
  for (const auto& tr : episode.transitions) {
    Tensor s =
        model.state_enc.encode_state(z, tr.p, tr.g, tr.k, tr.horizon);
    std::vector<double> p, logp;
    softmax_values(model.actor(s).value(), p, logp);
    const int a_pi = argmax(p);
    const auto q1v = model.q1(s).value();
    const auto q2v = model.q2(s).value();
    qc.q_policy.push_back(std::min(q1v[a_pi], q2v[a_pi]));
    qc.q_expert.push_back(
        std::min(q1v[tr.a_exp - 1], q2v[tr.a_exp - 1]));
    qc.keyframe.push_back(tr.next_is_keyframe);
  }
  return qc;
}

nn::Checkpoint make_checkpoint(const PolicyModel& model, const Trainer* trainer,
                               std::uint64_t config_hash) {
  nn::Checkpoint ckpt;
  ckpt.config_hash = config_hash;
  ckpt.epochs_trained = model.epochs_trained;
  ckpt.put_params(model.all_params());
  if (trainer) {
    ckpt.optimizers["encoder"] = trainer->opt_encoder().state();
    ckpt.optimizers["actor"] = trainer->opt_actor().state();
    ckpt.optimizers["critic"] = trainer->opt_critic().state();
    ckpt.optimizers["magnitude"] = trainer->opt_mag().state();
  }
  return ckpt;
}

void Trainer::restore_optimizers(const nn::Checkpoint& ckpt) {
  const auto get = [&](const char* name) -> const nn::Adam::State* {
    const auto it = ckpt.optimizers.find(name);
    return it == ckpt.optimizers.end() ? nullptr : &it->second;
  };
  if (const auto* s = get("encoder")) opt_encoder_.restore(*s);
  if (const auto* s = get("actor")) opt_actor_.restore(*s);
  if (const auto* s = get("critic")) opt_critic_.restore(*s);
  if (const auto* s = get("magnitude")) opt_mag_.restore(*s);
}

void restore_model(PolicyModel& model, const nn::Checkpoint& ckpt) {
  auto params = model.all_params();
  ckpt.load_params(params);
  model.epochs_trained = ckpt.epochs_trained;
}

}  // namespace trajrl::cql
