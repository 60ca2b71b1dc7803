#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "trajrl/baselines.hpp"
#include "trajrl/cql.hpp"
#include "trajrl/dataset.hpp"
#include "trajrl/io.hpp"
#include "trajrl/rollout.hpp"

// Glue between the data modules and the model: clip assembly, the training
// loop, and corpus-level evaluation.

namespace trajrl::pipeline {

// Assembles the 4-channel observation clip of one episode: stored RGB crops
// plus the guidance channel rasterized from the observed-window dense
// samples.
encoders::ObservationClip build_clip(const geom::Trajectory& traj,
                                     const dataset::EpisodeSpec& spec,
                                     const io::CropStore& crops,
                                     const encoders::EncoderConfig& enc_cfg);

std::vector<encoders::ObservationClip> build_clips(
    std::span<const geom::Trajectory> trajs,
    std::span<const dataset::Episode> episodes, const io::CropStore& crops,
    const encoders::EncoderConfig& enc_cfg);

// Observed step-grid (frame, position) pairs of an episode.
std::vector<rollout::ObservedPoint> observed_step_points(
    const geom::Trajectory& traj, const dataset::EpisodeSpec& spec);

// Ground-truth positions at the predicted frames.
std::vector<geom::PixelPoint> ground_truth_future(
    const geom::Trajectory& traj, const dataset::EpisodeSpec& spec);

// Runs the CQL trainer for cfg.epochs epochs; optional per-epoch log lines
// and loss reports.
cql::PolicyModel train_model(std::vector<dataset::Episode> episodes,
                             std::vector<encoders::ObservationClip> clips,
                             const encoders::EncoderConfig& enc_cfg,
                             const actions::ActionConfig& action_cfg,
                             const cql::TrainConfig& train_cfg,
                             std::uint64_t seed, std::ostream* log = nullptr,
                             std::vector<cql::LossReport>* reports = nullptr);

// Per-episode predictor: returns predicted positions for episode i.
using Predictor =
    std::function<std::vector<geom::PixelPoint>(int episode_index)>;

metrics::MetricsReport evaluate(std::span<const geom::Trajectory> trajs,
                                std::span<const dataset::Episode> episodes,
                                const Predictor& predictor,
                                const std::string& method);

metrics::MetricsReport evaluate_cql(
    std::span<const geom::Trajectory> trajs,
    std::span<const dataset::Episode> episodes,
    std::span<const encoders::ObservationClip> clips,
    const cql::PolicyModel& model, const rollout::GuidanceConfig& gcfg,
    int lookahead_h, const std::string& method = "cql");

metrics::MetricsReport evaluate_straightline(
    std::span<const geom::Trajectory> trajs,
    std::span<const dataset::Episode> episodes,
    const rollout::GuidanceConfig& gcfg,
    const std::string& method = "straightline");

metrics::MetricsReport evaluate_bc(
    std::span<const geom::Trajectory> trajs,
    std::span<const dataset::Episode> episodes,
    std::span<const encoders::ObservationClip> clips,
    const baselines::BcBaseline& bc, const std::string& method = "bc");

}  // namespace trajrl::pipeline
