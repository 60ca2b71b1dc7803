#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "trajrl/geom.hpp"
#include "trajrl/layers.hpp"
#include "trajrl/tensor.hpp"

namespace trajrl::encoders {

struct AllFramesMasked : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct OutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct EncoderConfig {
  int crop = 32;           // crop side in pixels; must be divisible by 8
  int embed_dim = 128;     // model dim D
  int heads = 4;
  int attn_layers = 2;
  int conv_channels[3] = {16, 32, 64};
  int ffn_hidden = 256;
  int freq_pairs = 8;      // sinusoidal frequency pairs per scalar
  int coord_embed = 64;    // per-coordinate-encoder projection width
  int phi_hidden = 256;
  int state_dim = 128;
  double guidance_radius_px = 2.0;
};

// Variable-length clip of 4-channel (RGB + guidance) crops, CHW layout,
// plus a validity mask marking real (non-padding) frames.
struct ObservationClip {
  int crop = 32;
  std::vector<std::vector<double>> frames;  // each 4*crop*crop, values [0,1]
  std::vector<std::uint8_t> valid;

  void append_padding(int count) {
    for (int i = 0; i < count; ++i) {
      frames.emplace_back(frames.empty() ? 0 : frames.front().size(), 0.0);
      valid.push_back(0);
    }
  }
};

struct CropGeometry {
  int crop = 32;
  int width_px = 1264;
  int height_px = 902;
  long long center_px_x = 0;  // crop center in source pixels
  long long center_px_y = 0;

  long long origin_x() const { return center_px_x - crop / 2; }
  long long origin_y() const { return center_px_y - crop / 2; }
};

// Rasterizes trajectory samples visible in the crop into a heatmap channel:
// a disk of the given radius per sample, intensity = confidence, overlaps
// take the maximum.
std::vector<double> rasterize_guidance(
    const CropGeometry& geo, std::span<const geom::DenseSample> samples,
    double radius_px = 2.0);

// Concatenates an RGB crop (3*crop*crop, CHW) with a guidance channel.
std::vector<double> make_frame(std::span<const double> rgb,
                               std::span<const double> guidance);

// Spatial CNN per frame, masked temporal self-attention across frames,
// masked mean pooling into the clip context z_c.
class ObservationEncoder {
 public:
  ObservationEncoder() = default;
  ObservationEncoder(const EncoderConfig& cfg, Rng& rng);

  nn::Tensor encode_clip(const ObservationClip& clip) const;
  // Per-frame CNN embedding, exposed for tests.
  nn::Tensor frame_embedding(const std::vector<double>& frame) const;

  void collect(nn::ParamList& out, const std::string& prefix) const;
  const EncoderConfig& config() const { return cfg_; }

 private:
  struct Block {
    nn::LayerNorm ln1, ln2;
    nn::Linear wq, wk, wv, wo;
    nn::Linear ffn1, ffn2;
  };

  EncoderConfig cfg_;
  nn::Conv2dLayer conv1_, conv2_, conv3_;
  nn::Linear proj_;
  std::vector<Block> blocks_;
  std::vector<double> pos_encoding_row(int t) const;
};

// Goal-conditioned state encoder: sinusoidal coordinate features for the
// current position, guidance and their difference, a linear progress
// embedding, and a two-layer perceptron over the concatenation with z_c.
class StateEncoder {
 public:
  StateEncoder() = default;
  StateEncoder(const EncoderConfig& cfg, Rng& rng);

  nn::Tensor encode_state(const nn::Tensor& z_c, const geom::PixelPoint& p,
                          const geom::PixelPoint& g, int k, int t_pred) const;

  void collect(nn::ParamList& out, const std::string& prefix) const;

  // Sinusoidal features of a 2-D point: [sin(2^i pi c), cos(2^i pi c)] per
  // coordinate, i < freq_pairs.
  static std::vector<double> sinusoidal(double x, double y, int freq_pairs);

 private:
  EncoderConfig cfg_;
  nn::Linear proj_p_, proj_g_, proj_rel_, proj_prog_;
  nn::Linear phi1_, phi2_;
};

}  // namespace trajrl::encoders
