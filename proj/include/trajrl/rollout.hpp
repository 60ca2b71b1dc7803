#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "trajrl/cql.hpp"
#include "trajrl/dataset.hpp"
#include "trajrl/geom.hpp"

namespace trajrl::rollout {

struct TooFewPoints : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GuidanceConfig {
  int window = 10;          // last L observed points used for the fit
  int quad_min_points = 5;  // quadratic fit needs at least this many
};

// (frame, position) pair of an observed step-grid point.
using ObservedPoint = std::pair<double, geom::PixelPoint>;

// Per-coordinate least-squares polynomial over the last min(L, n) observed
// points, degree 2 when enough points are available, else 1; evaluated at
// the target frame and clipped to [0,1]^2.
geom::PixelPoint extrapolate_guidance(std::span<const ObservedPoint> observed,
                                      double target_frame,
                                      const GuidanceConfig& cfg = {});

struct StepOutput {
  std::vector<double> probs;
  double magnitude = 0.0;
};

struct Rollout {
  std::vector<geom::PixelPoint> points;     // predicted positions, length K
  std::vector<geom::PixelPoint> guidance;   // pseudo-guidance per step
  std::vector<StepOutput> policy;           // per-step policy outputs
};

// Autoregressive inference: z_c once per clip, per-step pseudo-guidance by
// extrapolation, expected-direction update with clipping. Reads only
// observed data; pred_frames supplies the step grid to predict.
Rollout predict(const encoders::ObservationClip& clip,
                std::span<const ObservedPoint> observed,
                std::span<const int> pred_frames,
                const cql::PolicyModel& model,
                const GuidanceConfig& gcfg = {}, int lookahead_h = 1);

}  // namespace trajrl::rollout
