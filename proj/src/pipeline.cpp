#include "trajrl/pipeline.hpp"

#include <chrono>
#include <ostream>

namespace trajrl::pipeline {

encoders::ObservationClip build_clip(const geom::Trajectory& traj,
                                     const dataset::EpisodeSpec& spec,
                                     const io::CropStore& crops,
                                     const encoders::EncoderConfig& enc_cfg) {
  encoders::ObservationClip clip;
  clip.crop = enc_cfg.crop;

  // Annotations available at inference time: the observed window only.
  const int obs_first = spec.obs_frames.front();
  const int obs_last = spec.obs_frames.back();
  std::vector<geom::DenseSample> visible;
  for (const auto& d : traj.dense)
    if (d.frame >= obs_first && d.frame <= obs_last) visible.push_back(d);

  for (int f : spec.clip_frames) {
    const auto& tip = traj.dense_at(f).point;
    encoders::CropGeometry geo;
    geo.crop = enc_cfg.crop;
    geo.width_px = traj.width_px;
    geo.height_px = traj.height_px;
    geo.center_px_x = round_half_away(tip.x * (traj.width_px - 1));
    geo.center_px_y = round_half_away(tip.y * (traj.height_px - 1));
    const auto rgb = crops.frame_rgb(traj.id, f);
    const auto guidance =
        encoders::rasterize_guidance(geo, visible, enc_cfg.guidance_radius_px);
    clip.frames.push_back(encoders::make_frame(rgb, guidance));
    clip.valid.push_back(1);
  }
  return clip;
}

std::vector<encoders::ObservationClip> build_clips(
    std::span<const geom::Trajectory> trajs,
    std::span<const dataset::Episode> episodes, const io::CropStore& crops,
    const encoders::EncoderConfig& enc_cfg) {
  std::vector<encoders::ObservationClip> clips;
  clips.reserve(episodes.size());
  for (const auto& ep : episodes)
    clips.push_back(
        build_clip(trajs[ep.traj_index], ep.spec, crops, enc_cfg));
  return clips;
}

std::vector<rollout::ObservedPoint> observed_step_points(
    const geom::Trajectory& traj, const dataset::EpisodeSpec& spec) {
  std::vector<rollout::ObservedPoint> out;
  out.reserve(spec.obs_frames.size());
  for (int f : spec.obs_frames)
    out.emplace_back(static_cast<double>(f), traj.dense_at(f).point);
  return out;
}

std::vector<geom::PixelPoint> ground_truth_future(
    const geom::Trajectory& traj, const dataset::EpisodeSpec& spec) {
  std::vector<geom::PixelPoint> out;
  out.reserve(spec.pred_frames.size());
  for (int f : spec.pred_frames) out.push_back(traj.dense_at(f).point);
  return out;
}

cql::PolicyModel train_model(std::vector<dataset::Episode> episodes,
                             std::vector<encoders::ObservationClip> clips,
                             const encoders::EncoderConfig& enc_cfg,
                             const actions::ActionConfig& action_cfg,
                             const cql::TrainConfig& train_cfg,
                             std::uint64_t seed, std::ostream* log,
                             std::vector<cql::LossReport>* reports) {
  cql::PolicyModel model =
      cql::PolicyModel::create(enc_cfg, action_cfg, train_cfg, seed);
  cql::Trainer trainer(model, std::move(episodes), std::move(clips), train_cfg,
                       seed);
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = trainer.train_epoch(epoch);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    if (log) {
      (*log) << "epoch=" << epoch << " critic1=" << rep.critic1
             << " critic2=" << rep.critic2 << " cql_penalty=" << rep.cql_penalty
             << " policy=" << rep.policy << " bc=" << rep.bc
             << " magnitude=" << rep.magnitude << " lr_encoder="
             << nn::cosine_lr(train_cfg.lr_encoder, epoch, train_cfg.epochs)
             << " lr_actor="
             << nn::cosine_lr(train_cfg.lr_actor, epoch, train_cfg.epochs)
             << " lr_critic="
             << nn::cosine_lr(train_cfg.lr_critic, epoch, train_cfg.epochs)
             << " lr_mag="
             << nn::cosine_lr(train_cfg.lr_mag, epoch, train_cfg.epochs)
             << " clamped_mag_targets=" << rep.clamped_magnitude_targets
             << " wall_ms=" << ms << '\n';
      log->flush();
    }
    if (reports) reports->push_back(rep);
  }
  return model;
}

metrics::MetricsReport evaluate(std::span<const geom::Trajectory> trajs,
                                std::span<const dataset::Episode> episodes,
                                const Predictor& predictor,
                                const std::string& method) {
  metrics::MetricsReport report;
  report.method = method;
  if (!trajs.empty())
    report.resolution = {trajs[0].width_px, trajs[0].height_px};
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const auto& ep = episodes[i];
    const auto& traj = trajs[ep.traj_index];
    const metrics::Resolution res{traj.width_px, traj.height_px};
    const auto gt = ground_truth_future(traj, ep.spec);
    const auto pred = predictor(static_cast<int>(i));
    metrics::TrajectoryMetrics row;
    row.id = ep.id;
    row.ade = metrics::ade_px(pred, gt, res);
    row.fde = metrics::fde_px(pred, gt, res);
    row.fd = metrics::frechet_px(pred, gt, res);
    report.per_trajectory.push_back(std::move(row));
  }
  report.finalize();
  return report;
}

metrics::MetricsReport evaluate_cql(
    std::span<const geom::Trajectory> trajs,
    std::span<const dataset::Episode> episodes,
    std::span<const encoders::ObservationClip> clips,
    const cql::PolicyModel& model, const rollout::GuidanceConfig& gcfg,
    int lookahead_h, const std::string& method) {
  return evaluate(trajs, episodes,
                  [&](int i) {
                    const auto& ep = episodes[i];
                    const auto obs =
                        observed_step_points(trajs[ep.traj_index], ep.spec);
                    return rollout::predict(clips[i], obs, ep.spec.pred_frames,
                                            model, gcfg, lookahead_h)
                        .points;
                  },
                  method);
}

metrics::MetricsReport evaluate_straightline(
    std::span<const geom::Trajectory> trajs,
    std::span<const dataset::Episode> episodes,
    const rollout::GuidanceConfig& gcfg, const std::string& method) {
  return evaluate(trajs, episodes,
                  [&](int i) {
                    const auto& ep = episodes[i];
                    const auto obs =
                        observed_step_points(trajs[ep.traj_index], ep.spec);
                    return baselines::straightline_baseline(
                               obs, ep.spec.pred_frames, gcfg)
                        .points;
                  },
                  method);
}

metrics::MetricsReport evaluate_bc(
    std::span<const geom::Trajectory> trajs,
    std::span<const dataset::Episode> episodes,
    std::span<const encoders::ObservationClip> clips,
    const baselines::BcBaseline& bc, const std::string& method) {
  return evaluate(trajs, episodes,
                  [&](int i) {
                    const auto& ep = episodes[i];
                    const auto& last = ep.transitions.front().p;
                    return bc.predict(clips[i], last, ep.spec.t_pred()).points;
                  },
                  method);
}

}  // namespace trajrl::pipeline
