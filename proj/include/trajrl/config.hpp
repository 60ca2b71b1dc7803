#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajrl/cql.hpp"
#include "trajrl/dataset.hpp"
#include "trajrl/encoders.hpp"
#include "trajrl/rollout.hpp"
#include "trajrl/synthgen.hpp"

namespace trajrl::config {

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(const std::string& msg, int line_no)
      : std::runtime_error(msg), line(line_no) {}
};

// Flat key = value configuration; every tunable of the pipeline. Unknown
// keys are errors (reported with their line number).
struct Config {
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = automatic

  // dataset / episode
  std::string mode = "keyframe";  // keyframe | dense
  int t_obs = 6;
  int t_pred = 3;
  int lookahead_h = 1;
  int dense_clip_stride = 5;

  // actions
  double delta_max = 0.05;
  double idle_eps = 1e-4;

  // reward
  double r_time = -0.01;
  double r_prox_max = 0.5;
  double tau_dist = 0.02;
  std::optional<double> clamp_prox_at;  // off unless set

  // encoder
  int crop = 32;
  int embed_dim = 128;
  int heads = 4;
  int attn_layers = 2;
  int conv_c1 = 16, conv_c2 = 32, conv_c3 = 64;
  int ffn_hidden = 256;
  int freq_pairs = 8;
  int coord_embed = 64;
  int phi_hidden = 256;
  int state_dim = 128;
  double guidance_radius_px = 2.0;

  // training
  double alpha_cql = 0.01;
  double gamma = 0.95;
  double tau_soft = 0.005;
  double alpha_entropy = 0.2;
  double lambda_mag = 1.0;
  double bc_weight = 1.0;
  double lr_encoder = 1e-4;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  double lr_mag = 3e-4;
  int epochs = 100;
  int batch_size = 8;
  int max_transitions_per_update = 2048;
  int head_hidden = 128;
  std::vector<int> bucket_boundaries = {4, 8, 16, 32};

  // rollout guidance
  int guidance_window = 10;
  int quad_min_points = 5;

  // synthetic corpus
  int synth_count = 20;
  int synth_train = -1, synth_val = -1, synth_test = -1;
  int synth_keyframes = 9;
  int span_min = 40, span_max = 90;
  double curvature = 0.55;
  double noise_px = 2.0;
  int width = 1264, height = 902;
  int texture_waves = 4;
  int scene_group = 4;
  double max_step = 0.045;

  // bc baseline
  double bc_lr = 3e-4;
  int bc_epochs = 60;

  static Config from_file(const std::string& path);
  // Applies one key=value pair; line number only feeds error messages.
  void apply(const std::string& key, const std::string& value, int line = 0);
  // Named experiment presets (obs6pred3, obs3pred6).
  void apply_preset(const std::string& name);

  std::string to_text() const;
  std::uint64_t hash() const;

  dataset::DatasetConfig dataset_config() const;
  encoders::EncoderConfig encoder_config() const;
  actions::ActionConfig action_config() const;
  cql::TrainConfig train_config() const;
  rollout::GuidanceConfig guidance_config() const;
  synthgen::SynthConfig synth_config() const;
};

}  // namespace trajrl::config
