#include "trajrl/geom.hpp"

#include <algorithm>

#include "trajrl/common.hpp"

namespace trajrl::geom {

namespace {

int find_interval(const std::vector<double>& knots, double t) {
  // Largest i with knot_t[i] <= t, capped at the last interval.
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  int i = static_cast<int>(it - knots.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(knots.size()) - 2);
  return i;
}

}  // namespace

double SplineModel::eval(double t) const {
  if (knot_t.empty()) throw TooFewKnots("spline has no knots");
  if (t < knot_t.front() - 1e-9 || t > knot_t.back() + 1e-9)
    throw OutOfRange("spline evaluated outside knot span");
  const int i = find_interval(knot_t, t);
  const double dt = t - knot_t[i];
  return a[i] + dt * (b[i] + dt * (c[i] + dt * d[i]));
}

double SplineModel::second_derivative(double t) const {
  if (t < knot_t.front() - 1e-9 || t > knot_t.back() + 1e-9)
    throw OutOfRange("spline evaluated outside knot span");
  const int i = find_interval(knot_t, t);
  const double dt = t - knot_t[i];
  return 2.0 * c[i] + 6.0 * d[i] * dt;
}

SplineModel fit_natural_spline(std::span<const double> knot_t,
                               std::span<const double> knot_v) {
  const int n = static_cast<int>(knot_t.size());
  if (n < 2) throw TooFewKnots("natural spline needs at least 2 knots");
  if (static_cast<int>(knot_v.size()) != n)
    throw std::invalid_argument("knot frame/value size mismatch");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(knot_t[i]) || !std::isfinite(knot_v[i]))
      throw std::invalid_argument("non-finite knot");
    if (i > 0 && knot_t[i] <= knot_t[i - 1]) {
      if (knot_t[i] == knot_t[i - 1])
        throw DuplicateKnot("two knots share a frame index");
      throw std::invalid_argument("knot frames must be strictly increasing");
    }
  }

  // Solve for second derivatives M with natural ends M[0] = M[n-1] = 0 via
  // the Thomas algorithm on the interior tridiagonal system.
  std::vector<double> h(n - 1);
  for (int i = 0; i + 1 < n; ++i) h[i] = knot_t[i + 1] - knot_t[i];

  std::vector<double> m(n, 0.0);
  const int interior = n - 2;
  if (interior > 0) {
    std::vector<double> diag(interior), rhs(interior), upper(interior);
    for (int i = 0; i < interior; ++i) {
      diag[i] = 2.0 * (h[i] + h[i + 1]);
      upper[i] = h[i + 1];
      rhs[i] = 6.0 * ((knot_v[i + 2] - knot_v[i + 1]) / h[i + 1] -
                      (knot_v[i + 1] - knot_v[i]) / h[i]);
    }
    // Forward sweep (lower diagonal equals h[i]).
    for (int i = 1; i < interior; ++i) {
      const double w = h[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m[interior] = rhs[interior - 1] / diag[interior - 1];
    for (int i = interior - 1; i >= 1; --i)
      m[i] = (rhs[i - 1] - upper[i - 1] * m[i + 1]) / diag[i - 1];
  }

  SplineModel s;
  s.knot_t.assign(knot_t.begin(), knot_t.end());
  s.a.resize(n - 1);
  s.b.resize(n - 1);
  s.c.resize(n - 1);
  s.d.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    s.a[i] = knot_v[i];
    s.b[i] = (knot_v[i + 1] - knot_v[i]) / h[i] -
             h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
    s.c[i] = m[i] / 2.0;
    s.d[i] = (m[i + 1] - m[i]) / (6.0 * h[i]);
  }
  return s;
}

double assign_confidence(int frame, std::span<const int> keyframe_frames) {
  if (keyframe_frames.empty())
    throw std::invalid_argument("no keyframe frames");
  if (frame < keyframe_frames.front() || frame > keyframe_frames.back())
    throw OutOfRange("frame outside keyframe span");

  const auto it =
      std::lower_bound(keyframe_frames.begin(), keyframe_frames.end(), frame);
  if (it != keyframe_frames.end() && *it == frame) return 1.0;

  const int right = *it;
  const int left = *(it - 1);
  const int d = std::min(frame - left, right - frame);
  // Farthest interior frame from either end of the enclosing interval.
  const int d_max = (right - left) / 2;
  double conf = 0.9 - 0.45 * static_cast<double>(d) / d_max;
  return std::clamp(conf, 0.45, 0.9);
}

std::vector<DenseSample> densify(std::span<const Keyframe> keyframes,
                                 int width_px, int height_px) {
  const int n = static_cast<int>(keyframes.size());
  if (n < 2) throw TooFewKnots("densify needs at least 2 keyframes");
  if (width_px < 2 || height_px < 2)
    throw std::invalid_argument("source resolution must be at least 2x2");

  std::vector<double> t(n), vx(n), vy(n);
  std::vector<int> kf_frames(n);
  for (int i = 0; i < n; ++i) {
    t[i] = keyframes[i].frame;
    vx[i] = keyframes[i].point.x;
    vy[i] = keyframes[i].point.y;
    kf_frames[i] = keyframes[i].frame;
  }
  const SplineModel sx = fit_natural_spline(t, vx);
  const SplineModel sy = fit_natural_spline(t, vy);

  std::vector<DenseSample> out;
  out.reserve(keyframes.back().frame - keyframes.front().frame + 1);
  int next_kf = 0;
  for (int f = keyframes.front().frame; f <= keyframes.back().frame; ++f) {
    DenseSample s;
    s.frame = f;
    if (next_kf < n && keyframes[next_kf].frame == f) {
      s.point = keyframes[next_kf].point;  // keyframes reproduced verbatim
      s.confidence = 1.0;
      s.is_keyframe = true;
      ++next_kf;
    } else {
      long long px = round_half_away(sx.eval(f) * (width_px - 1));
      long long py = round_half_away(sy.eval(f) * (height_px - 1));
      px = std::clamp<long long>(px, 0, width_px - 1);
      py = std::clamp<long long>(py, 0, height_px - 1);
      s.point = {to_norm_x(px, width_px), to_norm_y(py, height_px)};
      s.confidence = assign_confidence(f, kf_frames);
      s.is_keyframe = false;
    }
    out.push_back(s);
  }
  return out;
}

void densify(Trajectory& traj) {
  traj.dense = densify(traj.keyframes, traj.width_px, traj.height_px);
}

const DenseSample& Trajectory::dense_at(int frame) const {
  const int f0 = dense.front().frame;
  const int idx = frame - f0;
  if (idx < 0 || idx >= static_cast<int>(dense.size()))
    throw OutOfRange("frame outside densified span");
  return dense[idx];
}

}  // namespace trajrl::geom
