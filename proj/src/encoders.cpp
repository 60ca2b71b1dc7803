#include "trajrl/encoders.hpp"

#include <algorithm>
#include <cmath>

namespace trajrl::encoders {

using nn::Tensor;

std::vector<double> rasterize_guidance(const CropGeometry& geo,
                                       std::span<const geom::DenseSample> samples,
                                       double radius_px) {
  const int c = geo.crop;
  std::vector<double> channel(static_cast<std::size_t>(c) * c, 0.0);
  const long long x0 = geo.origin_x();
  const long long y0 = geo.origin_y();
  const int r = static_cast<int>(std::ceil(radius_px));
  const double r2 = radius_px * radius_px;
  for (const auto& s : samples) {
    const long long sx = round_half_away(s.point.x * (geo.width_px - 1));
    const long long sy = round_half_away(s.point.y * (geo.height_px - 1));
    const long long lx = sx - x0;
    const long long ly = sy - y0;
    if (lx < -r || lx >= c + r || ly < -r || ly >= c + r) continue;
    for (long long dy = -r; dy <= r; ++dy) {
      for (long long dx = -r; dx <= r; ++dx) {
        if (static_cast<double>(dx * dx + dy * dy) > r2) continue;
        const long long px = lx + dx, py = ly + dy;
        if (px < 0 || px >= c || py < 0 || py >= c) continue;
        auto& cell = channel[py * c + px];
        cell = std::max(cell, s.confidence);
      }
    }
  }
  return channel;
}

std::vector<double> make_frame(std::span<const double> rgb,
                               std::span<const double> guidance) {
  std::vector<double> frame;
  frame.reserve(rgb.size() + guidance.size());
  frame.insert(frame.end(), rgb.begin(), rgb.end());
  frame.insert(frame.end(), guidance.begin(), guidance.end());
  return frame;
}

ObservationEncoder::ObservationEncoder(const EncoderConfig& cfg, Rng& rng)
    : cfg_(cfg) {
  if (cfg.crop % 8 != 0)
    throw std::invalid_argument("crop size must be divisible by 8");
  conv1_.init(rng, 4, cfg.conv_channels[0], 3, 2, 1);
  conv2_.init(rng, cfg.conv_channels[0], cfg.conv_channels[1], 3, 2, 1);
  conv3_.init(rng, cfg.conv_channels[1], cfg.conv_channels[2], 3, 2, 1);
  const int spatial = cfg.crop / 8;
  const int flat = cfg.conv_channels[2] * spatial * spatial;
  proj_.init(rng, flat, cfg.embed_dim, nn::Linear::he(flat));
  blocks_.resize(cfg.attn_layers);
  for (auto& b : blocks_) {
    b.ln1.init(cfg.embed_dim);
    b.ln2.init(cfg.embed_dim);
    const double s = nn::Linear::xavier(cfg.embed_dim);
    b.wq.init(rng, cfg.embed_dim, cfg.embed_dim, s);
    b.wk.init(rng, cfg.embed_dim, cfg.embed_dim, s);
    b.wv.init(rng, cfg.embed_dim, cfg.embed_dim, s);
    b.wo.init(rng, cfg.embed_dim, cfg.embed_dim, s);
    b.ffn1.init(rng, cfg.embed_dim, cfg.ffn_hidden,
                nn::Linear::he(cfg.embed_dim));
    b.ffn2.init(rng, cfg.ffn_hidden, cfg.embed_dim,
                nn::Linear::xavier(cfg.ffn_hidden));
  }
}

std::vector<double> ObservationEncoder::pos_encoding_row(int t) const {
  // Standard sinusoidal temporal position encoding.
  const int d = cfg_.embed_dim;
  std::vector<double> row(d);
  for (int i = 0; i < d / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / d);
    row[2 * i] = std::sin(t * freq);
    row[2 * i + 1] = std::cos(t * freq);
  }
  return row;
}

Tensor ObservationEncoder::frame_embedding(
    const std::vector<double>& frame) const {
  const int c = cfg_.crop;
  Tensor x = Tensor::from({4, c, c}, frame);
  x = nn::relu(conv1_(x));
  x = nn::relu(conv2_(x));
  x = nn::relu(conv3_(x));
  x = nn::reshape(x, {x.size()});
  return proj_(x);
}

Tensor ObservationEncoder::encode_clip(const ObservationClip& clip) const {
  const int t = static_cast<int>(clip.frames.size());
  if (t == 0 || clip.valid.size() != clip.frames.size())
    throw std::invalid_argument("clip frames/mask mismatch");
  bool any_valid = false;
  for (auto v : clip.valid) any_valid |= (v != 0);
  if (!any_valid) throw AllFramesMasked("clip has no valid frames");

  std::vector<Tensor> rows;
  rows.reserve(t);
  for (int i = 0; i < t; ++i) {
    if (clip.valid[i]) {
      rows.push_back(frame_embedding(clip.frames[i]));
    } else {
      rows.push_back(Tensor::zeros({cfg_.embed_dim}));
    }
  }
  Tensor x = nn::stack_rows(rows);

  // Temporal position encoding (constant, so padded rows stay inert keys --
  // they are excluded by the attention mask and the pooled mean).
  std::vector<double> pe(static_cast<std::size_t>(t) * cfg_.embed_dim);
  for (int i = 0; i < t; ++i) {
    const auto row = pos_encoding_row(i);
    std::copy(row.begin(), row.end(), pe.begin() + i * cfg_.embed_dim);
  }
  x = nn::add(x, Tensor::from({t, cfg_.embed_dim}, std::move(pe)));

  const int dh = cfg_.embed_dim / cfg_.heads;
  for (const auto& b : blocks_) {
    Tensor xn = b.ln1(x);
    Tensor q = b.wq(xn), k = b.wk(xn), v = b.wv(xn);
    std::vector<Tensor> head_outs;
    head_outs.reserve(cfg_.heads);
    for (int h = 0; h < cfg_.heads; ++h) {
      Tensor qh = nn::slice_cols(q, h * dh, (h + 1) * dh);
      Tensor kh = nn::slice_cols(k, h * dh, (h + 1) * dh);
      Tensor vh = nn::slice_cols(v, h * dh, (h + 1) * dh);
      head_outs.push_back(nn::masked_attention(qh, kh, vh, clip.valid));
    }
    x = nn::add(x, b.wo(nn::concat_cols(head_outs)));
    Tensor yn = b.ln2(x);
    x = nn::add(x, b.ffn2(nn::relu(b.ffn1(yn))));
  }
  return nn::masked_mean_rows(x, clip.valid);
}

void ObservationEncoder::collect(nn::ParamList& out,
                                 const std::string& prefix) const {
  conv1_.collect(out, prefix + ".conv1");
  conv2_.collect(out, prefix + ".conv2");
  conv3_.collect(out, prefix + ".conv3");
  proj_.collect(out, prefix + ".proj");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string bp = prefix + ".block" + std::to_string(i);
    blocks_[i].ln1.collect(out, bp + ".ln1");
    blocks_[i].ln2.collect(out, bp + ".ln2");
    blocks_[i].wq.collect(out, bp + ".wq");
    blocks_[i].wk.collect(out, bp + ".wk");
    blocks_[i].wv.collect(out, bp + ".wv");
    blocks_[i].wo.collect(out, bp + ".wo");
    blocks_[i].ffn1.collect(out, bp + ".ffn1");
    blocks_[i].ffn2.collect(out, bp + ".ffn2");
  }
}

StateEncoder::StateEncoder(const EncoderConfig& cfg, Rng& rng) : cfg_(cfg) {
  const int sin_dim = 4 * cfg.freq_pairs;
  const double s = nn::Linear::xavier(sin_dim);
  proj_p_.init(rng, sin_dim, cfg.coord_embed, s);
  proj_g_.init(rng, sin_dim, cfg.coord_embed, s);
  proj_rel_.init(rng, sin_dim, cfg.coord_embed, s);
  proj_prog_.init(rng, 1, cfg.coord_embed, 1.0);
  const int cat = cfg.embed_dim + 4 * cfg.coord_embed;
  phi1_.init(rng, cat, cfg.phi_hidden, nn::Linear::he(cat));
  phi2_.init(rng, cfg.phi_hidden, cfg.state_dim,
             nn::Linear::xavier(cfg.phi_hidden));
}

std::vector<double> StateEncoder::sinusoidal(double x, double y,
                                             int freq_pairs) {
  std::vector<double> f;
  f.reserve(4 * freq_pairs);
  for (double c : {x, y}) {
    for (int i = 0; i < freq_pairs; ++i) {
      const double w = std::ldexp(M_PI, i);  // 2^i * pi
      f.push_back(std::sin(w * c));
      f.push_back(std::cos(w * c));
    }
  }
  return f;
}

Tensor StateEncoder::encode_state(const Tensor& z_c, const geom::PixelPoint& p,
                                  const geom::PixelPoint& g, int k,
                                  int t_pred) const {
  if (k < 0 || k >= t_pred)
    throw OutOfRange("prediction step outside [0, T_pred)");
  const int sd = 4 * cfg_.freq_pairs;
  Tensor fp = Tensor::from({sd}, sinusoidal(p.x, p.y, cfg_.freq_pairs));
  Tensor fg = Tensor::from({sd}, sinusoidal(g.x, g.y, cfg_.freq_pairs));
  Tensor fr =
      Tensor::from({sd}, sinusoidal(g.x - p.x, g.y - p.y, cfg_.freq_pairs));
  Tensor prog =
      Tensor::from({1}, {static_cast<double>(k) / static_cast<double>(t_pred)});
  Tensor cat = nn::concat_vec(
      {z_c, proj_p_(fp), proj_g_(fg), proj_rel_(fr), proj_prog_(prog)});
  return phi2_(nn::relu(phi1_(cat)));
}

void StateEncoder::collect(nn::ParamList& out,
                           const std::string& prefix) const {
  proj_p_.collect(out, prefix + ".proj_p");
  proj_g_.collect(out, prefix + ".proj_g");
  proj_rel_.collect(out, prefix + ".proj_rel");
  proj_prog_.collect(out, prefix + ".proj_prog");
  phi1_.collect(out, prefix + ".phi1");
  phi2_.collect(out, prefix + ".phi2");
}

}  // namespace trajrl::encoders
