#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajrl/geom.hpp"

namespace trajrl::metrics {

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EmptyTrajectory : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct TooFewPairs : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NoNonzeroDifferences : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Resolution {
  int width = 1264;
  int height = 902;
};

// Mean pointwise Euclidean distance, in the units of the inputs.
double ade(std::span<const geom::PixelPoint> pred,
           std::span<const geom::PixelPoint> gt);

// Euclidean distance at the final step.
double fde(std::span<const geom::PixelPoint> pred,
           std::span<const geom::PixelPoint> gt);

// Discrete Frechet distance via the standard max/min dynamic program with
// running-max boundary rows.
double frechet(std::span<const geom::PixelPoint> pred,
               std::span<const geom::PixelPoint> gt);

// Pixel-space variants: x is scaled by width and y by height before distance
// computation (anisotropic rescaling to the source resolution).
double ade_px(std::span<const geom::PixelPoint> pred,
              std::span<const geom::PixelPoint> gt, Resolution res);
double fde_px(std::span<const geom::PixelPoint> pred,
              std::span<const geom::PixelPoint> gt, Resolution res);
double frechet_px(std::span<const geom::PixelPoint> pred,
                  std::span<const geom::PixelPoint> gt, Resolution res);

struct TrajectoryMetrics {
  std::string id;
  double ade = 0.0;
  double fde = 0.0;
  double fd = 0.0;  // discrete Frechet distance
};

struct MetricsReport {
  std::string method;
  Resolution resolution;
  std::vector<TrajectoryMetrics> per_trajectory;

  double mean_ade = 0.0, std_ade = 0.0;
  double mean_fde = 0.0, std_fde = 0.0;
  double mean_fd = 0.0, std_fd = 0.0;

  void finalize();  // fills the mean/std summary fields
};

struct WilcoxonResult {
  double statistic = 0.0;  // W = min(W+, W-), midranks under ties
  double p_value = 1.0;    // two-sided
  int n = 0;               // pairs remaining after dropping zero differences
  bool exact = false;
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; exact null distribution for n <= 25, normal approximation
// with tie correction otherwise.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b);

// Per-step pessimistic Q values along one trajectory: the policy's chosen
// action vs the logged expert action. Filled by the training module.
struct QCurve {
  std::vector<double> q_policy;
  std::vector<double> q_expert;
  std::vector<bool> keyframe;  // step lands on an annotated keyframe
};

// Fraction of steps where the policy's value meets or exceeds the expert's,
// within slack.
double conservatism_fraction(const QCurve& qc, double slack = 1e-6);

}  // namespace trajrl::metrics
