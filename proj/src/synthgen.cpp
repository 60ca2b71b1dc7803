#include "trajrl/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "trajrl/common.hpp"

namespace trajrl::synthgen {

namespace {

struct Wave {
  double amp, fx, fy, phase;
};

struct Scene {
  std::vector<Wave> waves[3];  // one wave set per RGB channel
};

Scene make_scene(std::uint64_t seed, int waves) {
  Rng rng(seed);
  Scene s;
  for (int c = 0; c < 3; ++c) {
    for (int w = 0; w < waves; ++w) {
      Wave wave;
      wave.amp = rng.uniform(0.05, 0.14);
      wave.fx = rng.uniform(1.0, 9.0);
      wave.fy = rng.uniform(1.0, 9.0);
      wave.phase = rng.uniform(0.0, 2.0 * M_PI);
      s.waves[c].push_back(wave);
    }
  }
  return s;
}

double scene_intensity(const Scene& s, int channel, double nx, double ny) {
  double v = 0.55;
  for (const auto& w : s.waves[channel])
    v += w.amp * std::sin(2.0 * M_PI * (w.fx * nx + w.fy * ny) + w.phase);
  return std::clamp(v, 0.05, 0.95);
}

// Composite quadratic Bezier with C1 joins, parameter u in [0, segments].
struct Curve {
  std::vector<geom::PixelPoint> p;  // segment endpoints, size segments+1
  std::vector<geom::PixelPoint> c;  // control points, size segments

  geom::PixelPoint eval(double u) const {
    const int n = static_cast<int>(c.size());
    int i = std::clamp(static_cast<int>(u), 0, n - 1);
    const double t = u - i;
    const double a = (1 - t) * (1 - t), b = 2 * t * (1 - t), d = t * t;
    return {a * p[i].x + b * c[i].x + d * p[i + 1].x,
            a * p[i].y + b * c[i].y + d * p[i + 1].y};
  }
};

Curve sample_curve(Rng& rng, double curvature) {
  const int segments = 3;
  Curve cv;
  geom::PixelPoint p0{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
  double theta = rng.uniform(0.0, 2.0 * M_PI);
  cv.p.push_back(p0);
  geom::PixelPoint ctrl{p0.x + rng.uniform(0.03, 0.06) * std::cos(theta),
                        p0.y + rng.uniform(0.03, 0.06) * std::sin(theta)};
  for (int i = 0; i < segments; ++i) {
    if (i > 0) {
      // C1 continuity: reflect the previous control point.
      ctrl = {2 * cv.p.back().x - cv.c.back().x,
              2 * cv.p.back().y - cv.c.back().y};
    }
    cv.c.push_back(ctrl);
    const double heading =
        std::atan2(ctrl.y - cv.p.back().y, ctrl.x - cv.p.back().x);
    const double bend = rng.uniform(-curvature, curvature);
    const double leg = rng.uniform(0.03, 0.06);
    cv.p.push_back({ctrl.x + leg * std::cos(heading + bend),
                    ctrl.y + leg * std::sin(heading + bend)});
  }
  return cv;
}

std::vector<int> sample_frames(Rng& rng, int keyframes, int span_min,
                               int span_max) {
  const int span = rng.uniform_int(span_min, span_max);
  std::vector<int> frames(keyframes);
  frames[0] = 0;
  frames[keyframes - 1] = span;
  const double step = static_cast<double>(span) / (keyframes - 1);
  for (int j = 1; j + 1 < keyframes; ++j) {
    const int jitter = rng.uniform_int(-static_cast<int>(step / 4),
                                       static_cast<int>(step / 4));
    frames[j] = static_cast<int>(std::lround(j * step)) + jitter;
  }
  for (int j = 1; j < keyframes; ++j)
    frames[j] = std::max(frames[j], frames[j - 1] + 1);
  frames[keyframes - 1] = std::max(frames[keyframes - 1], span);
  return frames;
}

bool try_make_trajectory(const SynthConfig& cfg, std::uint64_t seed,
                         const std::string& id, const std::string& scene_id,
                         geom::Trajectory& out) {
  Rng rng(seed);
  const Curve curve = sample_curve(rng, cfg.curvature);
  const auto frames = sample_frames(rng, cfg.keyframes, cfg.span_min,
                                    cfg.span_max);
  const double noise = cfg.noise_px / (cfg.width - 1);

  geom::Trajectory traj;
  traj.id = id;
  traj.scene = scene_id;
  traj.width_px = cfg.width;
  traj.height_px = cfg.height;
  const double u_max = static_cast<double>(curve.c.size());
  for (int j = 0; j < cfg.keyframes; ++j) {
    const double u = u_max * j / (cfg.keyframes - 1);
    geom::PixelPoint pt = curve.eval(u);
    pt.x += rng.normal(0.0, noise);
    pt.y += rng.normal(0.0, noise);
    if (pt.x < 0.03 || pt.x > 0.97 || pt.y < 0.03 || pt.y > 0.97) return false;
    geom::Keyframe kf;
    kf.frame = frames[j];
    const long long px = round_half_away(pt.x * (cfg.width - 1));
    const long long py = round_half_away(pt.y * (cfg.height - 1));
    kf.point = {geom::to_norm_x(px, cfg.width),
                geom::to_norm_y(py, cfg.height)};
    traj.keyframes.push_back(kf);
  }
  for (int j = 1; j < cfg.keyframes; ++j) {
    const double d = geom::distance(traj.keyframes[j].point,
                                    traj.keyframes[j - 1].point);
    if (d > cfg.max_step) return false;
  }
  geom::densify(traj);
  out = std::move(traj);
  return true;
}

void stamp_disk(std::vector<double>& rgb, int crop, double lx, double ly,
                double radius, double r, double g, double b, double alpha) {
  const int ir = static_cast<int>(std::ceil(radius));
  const int cx = static_cast<int>(std::lround(lx));
  const int cy = static_cast<int>(std::lround(ly));
  for (int dy = -ir; dy <= ir; ++dy) {
    for (int dx = -ir; dx <= ir; ++dx) {
      if (dx * dx + dy * dy > radius * radius) continue;
      const int x = cx + dx, y = cy + dy;
      if (x < 0 || x >= crop || y < 0 || y >= crop) continue;
      const int i = y * crop + x;
      const int n = crop * crop;
      rgb[0 * n + i] = (1 - alpha) * rgb[0 * n + i] + alpha * r;
      rgb[1 * n + i] = (1 - alpha) * rgb[1 * n + i] + alpha * g;
      rgb[2 * n + i] = (1 - alpha) * rgb[2 * n + i] + alpha * b;
    }
  }
}

io::CropStore::Sequence render_sequence(const SynthConfig& cfg,
                                        const Scene& scene,
                                        const geom::Trajectory& traj) {
  io::CropStore::Sequence seq;
  seq.first_frame = traj.first_frame();
  seq.crop = cfg.crop;
  const int n_frames = traj.last_frame() - traj.first_frame() + 1;
  const int area = cfg.crop * cfg.crop;
  seq.data.resize(static_cast<std::size_t>(n_frames) * 3 * area);

  for (int f = traj.first_frame(); f <= traj.last_frame(); ++f) {
    const auto& tip = traj.dense_at(f).point;
    const long long cx = round_half_away(tip.x * (cfg.width - 1));
    const long long cy = round_half_away(tip.y * (cfg.height - 1));
    const long long x0 = cx - cfg.crop / 2, y0 = cy - cfg.crop / 2;

    std::vector<double> rgb(3 * area, 0.0);
    for (int y = 0; y < cfg.crop; ++y) {
      for (int x = 0; x < cfg.crop; ++x) {
        const long long gx = x0 + x, gy = y0 + y;
        const int i = y * cfg.crop + x;
        if (gx < 0 || gx >= cfg.width || gy < 0 || gy >= cfg.height) continue;
        const double nx = static_cast<double>(gx) / (cfg.width - 1);
        const double ny = static_cast<double>(gy) / (cfg.height - 1);
        for (int c = 0; c < 3; ++c)
          rgb[c * area + i] = scene_intensity(scene, c, nx, ny);
      }
    }

    // Motion trail (older positions fainter), then the tip marker on top so
    // local pixels encode the recent movement direction.
    for (int back = 2; back >= 1; --back) {
      const int pf = f - 2 * back;
      if (pf < traj.first_frame()) continue;
      const auto& prev = traj.dense_at(pf).point;
      const double lx = prev.x * (cfg.width - 1) - x0;
      const double ly = prev.y * (cfg.height - 1) - y0;
      stamp_disk(rgb, cfg.crop, lx, ly, 1.6, 0.9, 0.25, 0.1,
                 back == 1 ? 0.55 : 0.3);
    }
    stamp_disk(rgb, cfg.crop, cx - x0, cy - y0, 2.6, 1.0, 0.92, 0.15, 1.0);

    std::uint8_t* dst =
        seq.data.data() +
        static_cast<std::size_t>(f - traj.first_frame()) * 3 * area;
    for (int i = 0; i < 3 * area; ++i)
      dst[i] = static_cast<std::uint8_t>(
          std::lround(std::clamp(rgb[i], 0.0, 1.0) * 255.0));
  }
  return seq;
}

}  // namespace

SynthOutput generate_corpus(const SynthConfig& cfg) {
  if (cfg.count < 1 && (cfg.n_train < 0 || cfg.n_val < 0 || cfg.n_test < 0))
    throw InvalidConfig("trajectory count must be >= 1");
  if (cfg.noise_px < 0) throw InvalidConfig("noise must be >= 0");
  if (cfg.keyframes < 2) throw InvalidConfig("need at least 2 keyframes");
  if (cfg.span_min < cfg.keyframes || cfg.span_max < cfg.span_min)
    throw InvalidConfig("bad frame span range");

  int n_train, n_val, n_test;
  if (cfg.n_train >= 0 && cfg.n_val >= 0 && cfg.n_test >= 0) {
    n_train = cfg.n_train;
    n_val = cfg.n_val;
    n_test = cfg.n_test;
  } else {
    n_train = static_cast<int>(std::lround(cfg.count * 0.70));
    n_val = static_cast<int>(std::lround(cfg.count * 0.15));
    n_test = cfg.count - n_train - n_val;
  }

  SynthOutput out;
  const int split_sizes[3] = {n_train, n_val, n_test};
  const char* split_names[3] = {"train", "val", "test"};
  std::uint64_t traj_counter = 0;
  for (int split = 0; split < 3; ++split) {
    auto& dst = split == 0 ? out.train : (split == 1 ? out.val : out.test);
    int made = 0;
    int scene_idx = 0;
    while (made < split_sizes[split]) {
      const std::string scene_id = std::string(split_names[split]) +
                                   "_scene" + std::to_string(scene_idx);
      const Scene scene = make_scene(
          derive_seed(cfg.seed, "scene", fnv1a(scene_id)), cfg.texture_waves);
      const int in_scene =
          std::min(cfg.scene_group, split_sizes[split] - made);
      for (int j = 0; j < in_scene; ++j) {
        const std::string id = std::string(split_names[split]) + "_" +
                               std::to_string(made + j);
        geom::Trajectory traj;
        bool ok = false;
        for (std::uint64_t attempt = 0; attempt < 200 && !ok; ++attempt)
          ok = try_make_trajectory(
              cfg, derive_seed(cfg.seed, "traj", traj_counter * 1000 + attempt),
              id, scene_id, traj);
        if (!ok)
          throw InvalidConfig(
              "could not sample an in-bounds trajectory; relax curvature or "
              "max_step");
        ++traj_counter;
        out.crops.add(id, render_sequence(cfg, scene, traj));
        dst.push_back(std::move(traj));
      }
      made += in_scene;
      ++scene_idx;
    }
  }
  return out;
}

void write_corpus_files(const SynthOutput& out, const std::string& out_dir) {
  io::write_corpus(out_dir + "/corpus_train.jsonl", out.train);
  io::write_corpus(out_dir + "/corpus_val.jsonl", out.val);
  io::write_corpus(out_dir + "/corpus_test.jsonl", out.test);
  out.crops.save(out_dir + "/crops.bin");
}

}  // namespace trajrl::synthgen
