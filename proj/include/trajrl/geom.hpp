#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajrl::geom {

struct DuplicateKnot : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct TooFewKnots : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct OutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Position in normalized image coordinates, both components in [0, 1].
// y grows downward, matching image convention.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const PixelPoint& a, const PixelPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Keyframe {
  int frame = 0;
  PixelPoint point;
  double confidence = 1.0;  // annotated keyframes are fully trusted
};

struct DenseSample {
  int frame = 0;
  PixelPoint point;
  double confidence = 1.0;
  bool is_keyframe = false;
};

// One-channel natural cubic spline over frame index.
// value(t) = a[i] + b[i]*dt + c[i]*dt^2 + d[i]*dt^3 with dt = t - knot_t[i]
// on interval [knot_t[i], knot_t[i+1]].
struct SplineModel {
  std::vector<double> knot_t;
  std::vector<double> a, b, c, d;  // per-interval coefficients

  double eval(double t) const;
  double second_derivative(double t) const;
  int num_knots() const { return static_cast<int>(knot_t.size()); }
};

struct Trajectory {
  std::string id;
  std::string scene;  // grouping key used for leakage-free splits
  int width_px = 0;
  int height_px = 0;
  std::vector<Keyframe> keyframes;
  std::vector<DenseSample> dense;

  int first_frame() const { return keyframes.front().frame; }
  int last_frame() const { return keyframes.back().frame; }
  // Dense sample at an integer frame; throws OutOfRange outside the span.
  const DenseSample& dense_at(int frame) const;
};

// Fits a natural cubic spline through (t, v) knots. Knot frames must be
// strictly increasing and values finite.
SplineModel fit_natural_spline(std::span<const double> knot_t,
                               std::span<const double> knot_v);

// Confidence for an integer frame inside the keyframe span: 1.0 on a
// keyframe, otherwise 0.9 - 0.45 * d / d_max within the enclosing interval,
// clamped to [0.45, 0.9].
double assign_confidence(int frame, std::span<const int> keyframe_frames);

// Spline-densifies keyframes to every integer frame in the span.
// Interpolated coordinates are rounded to the nearest integer pixel of the
// source resolution and re-normalized; keyframe samples are kept verbatim.
std::vector<DenseSample> densify(std::span<const Keyframe> keyframes,
                                 int width_px, int height_px);

// Convenience: fills traj.dense from traj.keyframes.
void densify(Trajectory& traj);

inline double to_norm_x(long long px, int width_px) {
  return static_cast<double>(px) / static_cast<double>(width_px - 1);
}
inline double to_norm_y(long long py, int height_px) {
  return static_cast<double>(py) / static_cast<double>(height_px - 1);
}

}  // namespace trajrl::geom
