#include "trajrl/baselines.hpp"

#include <numeric>

#include "trajrl/common.hpp"
#include "trajrl/optim.hpp"

namespace trajrl::baselines {

using nn::Tensor;

rollout::Rollout straightline_baseline(
    std::span<const rollout::ObservedPoint> observed,
    std::span<const int> pred_frames, const rollout::GuidanceConfig& cfg) {
  rollout::Rollout out;
  for (int f : pred_frames) {
    const auto g = rollout::extrapolate_guidance(observed, f, cfg);
    out.points.push_back(g);
    out.guidance.push_back(g);
  }
  return out;
}

BcBaseline::BcBaseline(const encoders::EncoderConfig& enc_cfg,
                       const BcConfig& cfg, std::uint64_t seed)
    : enc_cfg_(enc_cfg), cfg_(cfg), seed_(seed) {
  Rng rng(derive_seed(seed, "bc_init"));
  obs_enc_ = encoders::ObservationEncoder(enc_cfg, rng);
  const int sin_dim = 4 * enc_cfg.freq_pairs;
  proj_p_.init(rng, sin_dim, enc_cfg.coord_embed,
               nn::Linear::xavier(sin_dim));
  proj_prog_.init(rng, 1, enc_cfg.coord_embed, 1.0);
  head_.init(rng, enc_cfg.embed_dim + 2 * enc_cfg.coord_embed,
             cfg.head_hidden, 2, 0.01);
}

Tensor BcBaseline::step_offset(const Tensor& z, const geom::PixelPoint& p0,
                               int k, int horizon) const {
  Tensor fp = Tensor::from(
      {4 * enc_cfg_.freq_pairs},
      encoders::StateEncoder::sinusoidal(p0.x, p0.y, enc_cfg_.freq_pairs));
  Tensor prog = Tensor::from(
      {1}, {static_cast<double>(k) / static_cast<double>(horizon)});
  Tensor cat = nn::concat_vec({z, proj_p_(fp), proj_prog_(prog)});
  return head_(cat);  // offset from the last observed point
}

void BcBaseline::collect_params(nn::ParamList& out) const {
  obs_enc_.collect(out, "bc.obs_enc");
  proj_p_.collect(out, "bc.proj_p");
  proj_prog_.collect(out, "bc.proj_prog");
  head_.collect(out, "bc.head");
}

void BcBaseline::train(std::span<const dataset::Episode> episodes,
                       std::span<const encoders::ObservationClip> clips) {
  if (episodes.empty()) throw dataset::EmptyCorpus("bc: empty corpus");

  nn::ParamList params;
  collect_params(params);
  nn::Adam opt(params);

  std::vector<int> order(episodes.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    Rng rng(derive_seed(seed_, "bc_epoch", epoch));
    rng.shuffle(order);
    const double lr = nn::cosine_lr(cfg_.lr, epoch, cfg_.epochs);
    double epoch_loss = 0.0;
    int updates = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg_.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + cfg_.batch_size);
      std::vector<Tensor> losses;
      for (std::size_t i = start; i < end; ++i) {
        const auto& ep = episodes[order[i]];
        Tensor z = obs_enc_.encode_clip(clips[order[i]]);
        const geom::PixelPoint p0 = ep.transitions.front().p;
        for (const auto& tr : ep.transitions) {
          Tensor offset = step_offset(z, p0, tr.k, tr.horizon);
          Tensor target = Tensor::from(
              {2}, {tr.p_next.x - p0.x, tr.p_next.y - p0.y});
          losses.push_back(nn::mse(offset, target));
        }
      }
      opt.zero_grad();
      Tensor loss = nn::mean_all(nn::stack_scalars(losses));
      loss.backward();
      opt.step(lr);
      epoch_loss += loss.item();
      ++updates;
    }
    last_loss_ = updates > 0 ? epoch_loss / updates : 0.0;
    ++epochs_trained_;
  }
}

rollout::Rollout BcBaseline::predict(const encoders::ObservationClip& clip,
                                     const geom::PixelPoint& last_observed,
                                     int horizon) const {
  rollout::Rollout out;
  Tensor z = obs_enc_.encode_clip(clip);
  for (int k = 0; k < horizon; ++k) {
    const auto off = step_offset(z, last_observed, k, horizon).value();
    out.points.push_back(
        {clamp01(last_observed.x + off[0]), clamp01(last_observed.y + off[1])});
  }
  return out;
}

}  // namespace trajrl::baselines
