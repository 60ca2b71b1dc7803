#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajrl/geom.hpp"
#include "trajrl/io.hpp"

namespace trajrl::synthgen {

struct InvalidConfig : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SynthConfig {
  std::uint64_t seed = 42;
  int count = 20;  // total trajectories; split 70/15/15 by scene group
  // Explicit per-split counts override `count` when all are >= 0.
  int n_train = -1, n_val = -1, n_test = -1;
  int keyframes = 9;
  int span_min = 40, span_max = 90;  // trajectory length in frames
  double curvature = 0.55;  // max bend between curve legs, radians
  double noise_px = 2.0;    // keyframe annotation noise, pixels
  int width = 1264, height = 902;
  int texture_waves = 4;    // background texture complexity
  int scene_group = 4;      // trajectories sharing one scene
  int crop = 32;            // rendered crop size
  double max_step = 0.045;  // max inter-keyframe distance, normalized
};

struct SynthOutput {
  std::vector<geom::Trajectory> train, val, test;
  io::CropStore crops;  // single store keyed by trajectory id
};

// Procedurally generates keyframe-annotated trajectories along piecewise
// quadratic Bezier curves with rendered crops (smooth scene texture plus a
// high-contrast tip marker with a short motion trail). Splits are grouped
// by scene so trajectories of one scene never straddle splits.
SynthOutput generate_corpus(const SynthConfig& cfg);

// Writes corpus_{train,val,test}.jsonl plus crops.bin under out_dir.
void write_corpus_files(const SynthOutput& out, const std::string& out_dir);

}  // namespace trajrl::synthgen
