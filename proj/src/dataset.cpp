#include "trajrl/dataset.hpp"

#include <algorithm>

#include "trajrl/common.hpp"

namespace trajrl::dataset {

std::vector<geom::PixelPoint> episode_waypoints(const geom::Trajectory& traj,
                                                const EpisodeSpec& spec) {
  std::vector<geom::PixelPoint> pos;
  pos.reserve(spec.pred_frames.size() + 1);
  pos.push_back(traj.dense_at(spec.obs_frames.back()).point);
  for (int f : spec.pred_frames) pos.push_back(traj.dense_at(f).point);
  return pos;
}

int guidance_index(int k, int horizon, int lookahead_h) {
  if (lookahead_h <= 0) return horizon;  // goal-only
  return std::min(k + lookahead_h, horizon);
}

geom::PixelPoint training_guidance(const geom::Trajectory& traj,
                                   const EpisodeSpec& spec, int k,
                                   int lookahead_h) {
  const int horizon = spec.t_pred();
  if (k < 0 || k >= horizon)
    throw OutOfRange("guidance step outside prediction horizon");
  const auto pos = episode_waypoints(traj, spec);
  return pos[guidance_index(k, horizon, lookahead_h)];
}

EpisodeSpec make_episode_spec(const geom::Trajectory& traj,
                              const DatasetConfig& cfg) {
  EpisodeSpec spec;
  if (cfg.t_obs < 1 || cfg.t_pred < 1)
    throw SpecOutOfRange("t_obs and t_pred must be >= 1");
  if (cfg.mode == StepMode::kKeyframe) {
    const int n = static_cast<int>(traj.keyframes.size());
    if (cfg.t_obs + cfg.t_pred > n)
      throw SpecOutOfRange("trajectory has too few keyframes for the spec");
    for (int i = 0; i < cfg.t_obs; ++i)
      spec.obs_frames.push_back(traj.keyframes[i].frame);
    for (int i = cfg.t_obs; i < cfg.t_obs + cfg.t_pred; ++i)
      spec.pred_frames.push_back(traj.keyframes[i].frame);
    spec.clip_frames = spec.obs_frames;
  } else {
    const int first = traj.first_frame(), last = traj.last_frame();
    if (first + cfg.t_obs + cfg.t_pred - 1 > last)
      throw SpecOutOfRange("trajectory span too short for the spec");
    for (int i = 0; i < cfg.t_obs; ++i) spec.obs_frames.push_back(first + i);
    for (int i = 0; i < cfg.t_pred; ++i)
      spec.pred_frames.push_back(first + cfg.t_obs + i);
    const int stride = std::max(1, cfg.dense_clip_stride);
    // Subsample the clip but always keep the latest observed frame.
    for (int i = 0; i < cfg.t_obs; i += stride)
      spec.clip_frames.push_back(spec.obs_frames[i]);
    if (spec.clip_frames.back() != spec.obs_frames.back())
      spec.clip_frames.push_back(spec.obs_frames.back());
  }
  return spec;
}

std::vector<Transition> extract_transitions(const geom::Trajectory& traj,
                                            const EpisodeSpec& spec,
                                            const DatasetConfig& cfg) {
  const int horizon = spec.t_pred();
  if (horizon < 1) throw SpecOutOfRange("empty prediction horizon");
  const auto pos = episode_waypoints(traj, spec);

  std::vector<Transition> out;
  out.reserve(horizon);
  for (int k = 0; k < horizon; ++k) {
    Transition tr;
    tr.k = k;
    tr.horizon = horizon;
    tr.p = pos[k];
    tr.p_next = pos[k + 1];
    tr.g = pos[guidance_index(k, horizon, cfg.lookahead_h)];
    tr.g_next = pos[guidance_index(k + 1, horizon, cfg.lookahead_h)];
    const double dx = tr.p_next.x - tr.p.x;
    const double dy = tr.p_next.y - tr.p.y;
    tr.a_exp = actions::quantize_displacement(dx, dy, cfg.action.idle_eps);
    tr.expert_len = std::hypot(dx, dy);
    tr.done = (k == horizon - 1);
    tr.frame = k == 0 ? spec.obs_frames.back() : spec.pred_frames[k - 1];
    tr.frame_next = spec.pred_frames[k];
    const auto& ref = traj.dense_at(tr.frame_next);
    tr.next_is_keyframe = ref.is_keyframe;
    tr.reward = reward::step_reward(tr.p_next, ref, tr.done, cfg.reward);
    out.push_back(tr);
  }
  return out;
}

std::vector<Episode> build_episodes(std::span<const geom::Trajectory> corpus,
                                    const DatasetConfig& cfg) {
  std::vector<Episode> episodes;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& traj = corpus[i];
    EpisodeSpec spec;
    try {
      spec = make_episode_spec(traj, cfg);
    } catch (const SpecOutOfRange&) {
      continue;
    }
    Episode ep;
    ep.id = traj.id;
    ep.traj_index = static_cast<int>(i);
    ep.spec = spec;
    ep.transitions = extract_transitions(traj, spec, cfg);
    episodes.push_back(std::move(ep));
  }
  if (episodes.empty()) throw EmptyCorpus("no usable episodes in corpus");
  return episodes;
}

std::vector<Bucket> make_buckets(std::span<const Episode> episodes,
                                 std::span<const int> boundaries) {
  if (episodes.empty()) throw EmptyCorpus("make_buckets: no episodes");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (boundaries[i] <= boundaries[i - 1])
      throw std::invalid_argument("bucket boundaries must strictly increase");

  const int nb = static_cast<int>(boundaries.size()) + 1;
  std::vector<Bucket> buckets(nb);
  for (int b = 0; b < nb; ++b) {
    buckets[b].len_lo = b == 0 ? 0 : boundaries[b - 1];
    buckets[b].len_hi = b == nb - 1 ? 0 : boundaries[b];
  }
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const int len = episodes[i].clip_len();
    int b = 0;
    while (b + 1 < nb && len > boundaries[b]) ++b;
    buckets[b].episodes.push_back(static_cast<int>(i));
  }
  std::erase_if(buckets, [](const Bucket& b) { return b.episodes.empty(); });
  return buckets;
}

BatchSampler::BatchSampler(std::vector<Bucket> buckets, int batch_size,
                           std::uint64_t seed)
    : buckets_(std::move(buckets)), batch_size_(std::max(1, batch_size)),
      seed_(seed) {}

std::vector<std::vector<int>> BatchSampler::epoch_batches(int epoch) const {
  std::vector<std::vector<int>> batches;
  for (std::size_t b = 0; b < buckets_.size(); ++b) {
    std::vector<int> members = buckets_[b].episodes;
    Rng rng(derive_seed(seed_, "bucket_shuffle",
                        static_cast<std::uint64_t>(epoch) * 8191 + b));
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); i += batch_size_) {
      const std::size_t end = std::min(members.size(), i + batch_size_);
      batches.emplace_back(members.begin() + i, members.begin() + end);
    }
  }
  Rng rng(derive_seed(seed_, "batch_order", epoch));
  rng.shuffle(batches);
  return batches;
}

}  // namespace trajrl::dataset
