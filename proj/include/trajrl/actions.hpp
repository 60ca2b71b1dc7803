#pragma once

#include <array>
#include <span>
#include <stdexcept>

#include "trajrl/geom.hpp"

namespace trajrl::actions {

struct InvalidAction : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidDistribution : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// 8 compass directions at 45 degree spacing plus one idle action (id 9).
inline constexpr int kNumActions = 9;
inline constexpr int kIdleAction = 9;

struct ActionConfig {
  double delta_max = 0.05;  // max step length, normalized units
  double idle_eps = 1e-4;   // displacements below this quantize to idle
};

// Unit vector for action id a in {1..9}. In image coordinates (y down),
// a=1 points up; ids advance clockwise; a=9 is the zero vector.
std::array<double, 2> unit_vector(int a);

// Nearest compass direction of a displacement; idle when the displacement
// norm is below idle_eps. Ties break toward the smallest action id.
int quantize_displacement(double dx, double dy, double idle_eps = 1e-4);

// Probability-weighted mixture of the action unit vectors.
std::array<double, 2> expected_direction(std::span<const double> probs);

// Kinematic update: p + magnitude * expected_direction(probs), clipped to
// [0,1] per coordinate.
geom::PixelPoint step(const geom::PixelPoint& p, std::span<const double> probs,
                      double magnitude);

}  // namespace trajrl::actions
