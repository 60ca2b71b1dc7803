#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajrl/actions.hpp"
#include "trajrl/geom.hpp"
#include "trajrl/reward.hpp"

namespace trajrl::dataset {

struct SpecOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct EmptyCorpus : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct OutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Keyframe mode advances one prediction step per keyframe interval; dense
// mode advances one step per frame.
enum class StepMode { kKeyframe, kDense };

struct DatasetConfig {
  StepMode mode = StepMode::kKeyframe;
  int t_obs = 6;
  int t_pred = 3;
  // Guidance lookahead in prediction steps; <= 0 selects goal-only guidance
  // (always the episode's final ground-truth point).
  int lookahead_h = 1;
  int dense_clip_stride = 5;  // clip frame subsampling in dense mode
  actions::ActionConfig action;
  reward::RewardConfig reward;
};

struct EpisodeSpec {
  std::vector<int> obs_frames;   // step-grid frames of the observed window
  std::vector<int> pred_frames;  // frames to predict, in order
  std::vector<int> clip_frames;  // frames rendered into the observation clip

  int t_obs() const { return static_cast<int>(obs_frames.size()); }
  int t_pred() const { return static_cast<int>(pred_frames.size()); }
};

// One logged expert transition.
struct Transition {
  int k = 0;  // prediction step index, 0-based
  int horizon = 0;
  geom::PixelPoint p, p_next;
  geom::PixelPoint g, g_next;
  int a_exp = actions::kIdleAction;
  double expert_len = 0.0;  // raw expert step length, normalized units
  reward::RewardBreakdown reward;
  bool done = false;
  int frame = 0, frame_next = 0;
  bool next_is_keyframe = false;
};

struct Episode {
  std::string id;
  int traj_index = -1;
  EpisodeSpec spec;
  std::vector<Transition> transitions;

  int clip_len() const { return static_cast<int>(spec.clip_frames.size()); }
};

// Ground-truth waypoints of an episode: pos[0] is the position at the last
// observed frame, pos[j] the position at pred_frames[j-1].
std::vector<geom::PixelPoint> episode_waypoints(const geom::Trajectory& traj,
                                                const EpisodeSpec& spec);

// Index into episode_waypoints used as guidance at step k.
int guidance_index(int k, int horizon, int lookahead_h);

// Training-time guidance coordinate for step k (ground-truth future).
geom::PixelPoint training_guidance(const geom::Trajectory& traj,
                                   const EpisodeSpec& spec, int k,
                                   int lookahead_h = 1);

// Builds the step grid for one trajectory under the config; throws
// SpecOutOfRange when the trajectory cannot cover t_obs + t_pred.
EpisodeSpec make_episode_spec(const geom::Trajectory& traj,
                              const DatasetConfig& cfg);

// Walks the demonstration and logs one transition per prediction step.
std::vector<Transition> extract_transitions(const geom::Trajectory& traj,
                                            const EpisodeSpec& spec,
                                            const DatasetConfig& cfg);

// One episode per trajectory. Trajectories too short for the spec are
// skipped; throws EmptyCorpus if none remain.
std::vector<Episode> build_episodes(std::span<const geom::Trajectory> corpus,
                                    const DatasetConfig& cfg);

struct Bucket {
  int len_lo = 0;  // exclusive
  int len_hi = 0;  // inclusive; 0 len_hi on the last bucket means unbounded
  std::vector<int> episodes;
};

// Partition episodes by clip length at the given strictly increasing
// boundaries. Buckets that would be empty are dropped.
std::vector<Bucket> make_buckets(std::span<const Episode> episodes,
                                 std::span<const int> boundaries);

// Seed-deterministic batch sequence: batches never straddle buckets, member
// order and batch order reshuffle per epoch.
class BatchSampler {
 public:
  BatchSampler(std::vector<Bucket> buckets, int batch_size,
               std::uint64_t seed);
  std::vector<std::vector<int>> epoch_batches(int epoch) const;

 private:
  std::vector<Bucket> buckets_;
  int batch_size_;
  std::uint64_t seed_;
};

}  // namespace trajrl::dataset
