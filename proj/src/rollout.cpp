#include "trajrl/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "trajrl/common.hpp"

namespace trajrl::rollout {

namespace {

// Small dense solve with partial pivoting (n <= 3).
void solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    const double d = a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
}

double polyfit_eval(std::span<const double> t, std::span<const double> v,
                    int degree, double t_eval) {
  // Normal equations over frames centered at the last observed frame.
  const int n = static_cast<int>(t.size());
  const double t0 = t[n - 1];
  const double span = std::max(1.0, t0 - t[0]);
  const int m = degree + 1;
  std::vector<double> a(m * m, 0.0), b(m, 0.0);
  for (int i = 0; i < n; ++i) {
    const double u = (t[i] - t0) / span;
    double pw[3] = {1.0, u, u * u};
    for (int r = 0; r < m; ++r) {
      b[r] += pw[r] * v[i];
      for (int c = 0; c < m; ++c) a[r * m + c] += pw[r] * pw[c];
    }
  }
  solve_dense(a, b, m);
  const double u = (t_eval - t0) / span;
  double out = 0.0, pw = 1.0;
  for (int r = 0; r < m; ++r, pw *= u) out += b[r] * pw;
  return out;
}

}  // namespace

geom::PixelPoint extrapolate_guidance(std::span<const ObservedPoint> observed,
                                      double target_frame,
                                      const GuidanceConfig& cfg) {
  if (observed.size() < 2)
    throw TooFewPoints("extrapolation needs at least 2 observed points");
  const int n_used =
      std::min<int>(cfg.window, static_cast<int>(observed.size()));
  const auto tail = observed.subspan(observed.size() - n_used);
  const int degree = n_used >= cfg.quad_min_points ? 2 : 1;

  std::vector<double> t(n_used), vx(n_used), vy(n_used);
  for (int i = 0; i < n_used; ++i) {
    t[i] = tail[i].first;
    vx[i] = tail[i].second.x;
    vy[i] = tail[i].second.y;
  }
  return {clamp01(polyfit_eval(t, vx, degree, target_frame)),
          clamp01(polyfit_eval(t, vy, degree, target_frame))};
}

Rollout predict(const encoders::ObservationClip& clip,
                std::span<const ObservedPoint> observed,
                std::span<const int> pred_frames,
                const cql::PolicyModel& model, const GuidanceConfig& gcfg,
                int lookahead_h) {
  if (observed.empty()) throw TooFewPoints("predict: no observed points");
  const int horizon = static_cast<int>(pred_frames.size());

  Rollout out;
  out.points.reserve(horizon);
  nn::Tensor z = model.obs_enc.encode_clip(clip);

  geom::PixelPoint p = observed.back().second;
  for (int k = 0; k < horizon; ++k) {
    const int gi = dataset::guidance_index(k, horizon, lookahead_h);
    const geom::PixelPoint g =
        extrapolate_guidance(observed, pred_frames[gi - 1], gcfg);
    nn::Tensor s = model.state_enc.encode_state(z, p, g, k, horizon);
    StepOutput step;
    {
      const auto logits = model.policy_logits(s).value();
      double mx = logits[0];
      for (double v : logits) mx = std::max(mx, v);
      double zsum = 0.0;
      for (double v : logits) zsum += std::exp(v - mx);
      step.probs.resize(logits.size());
      for (std::size_t a = 0; a < logits.size(); ++a)
        step.probs[a] = std::exp(logits[a] - mx) / zsum;
    }
    step.magnitude = model.magnitude_of(s).item();
    p = actions::step(p, step.probs, step.magnitude);
    out.points.push_back(p);
    out.guidance.push_back(g);
    out.policy.push_back(std::move(step));
  }
  return out;
}

}  // namespace trajrl::rollout
