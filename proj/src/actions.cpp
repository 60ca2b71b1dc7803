#include "trajrl/actions.hpp"

#include <cmath>

#include "trajrl/common.hpp"

namespace trajrl::actions {

std::array<double, 2> unit_vector(int a) {
  if (a < 1 || a > kNumActions) throw InvalidAction("action id outside 1..9");
  if (a == kIdleAction) return {0.0, 0.0};
  const double angle = (a - 1) * M_PI / 4.0;
  return {std::sin(angle), -std::cos(angle)};
}

int quantize_displacement(double dx, double dy, double idle_eps) {
  if (!std::isfinite(dx) || !std::isfinite(dy))
    throw std::invalid_argument("non-finite displacement");
  if (std::hypot(dx, dy) < idle_eps) return kIdleAction;
  int best = 1;
  double best_dot = -1e300;
  for (int a = 1; a <= 8; ++a) {
    const auto u = unit_vector(a);
    const double dot = dx * u[0] + dy * u[1];
    if (dot > best_dot) {
      best_dot = dot;
      best = a;
    }
  }
  return best;
}

std::array<double, 2> expected_direction(std::span<const double> probs) {
  if (probs.size() != kNumActions)
    throw InvalidDistribution("expected 9 action probabilities");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvalidDistribution("negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw InvalidDistribution("probabilities do not sum to 1");
  double ex = 0.0, ey = 0.0;
  for (int a = 1; a <= kNumActions; ++a) {
    const auto u = unit_vector(a);
    ex += probs[a - 1] * u[0];
    ey += probs[a - 1] * u[1];
  }
  return {ex, ey};
}

geom::PixelPoint step(const geom::PixelPoint& p, std::span<const double> probs,
                      double magnitude) {
  const auto d = expected_direction(probs);
  return {clamp01(p.x + magnitude * d[0]), clamp01(p.y + magnitude * d[1])};
}

}  // namespace trajrl::actions
