#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajrl/tensor.hpp"

namespace trajrl::nn {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

using ParamList = std::vector<NamedParam>;

// Cosine-annealed learning rate with a floor at floor_frac of the base rate:
// lr(t) = floor + 0.5 * (lr0 - floor) * (1 + cos(pi * t / T)).
double cosine_lr(double lr0, int t, int total, double floor_frac = 0.01);

class Adam {
 public:
  Adam() = default;
  explicit Adam(ParamList params, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  // One update using the current gradients; clears nothing.
  void step(double lr);
  void zero_grad();

  std::int64_t step_count() const { return t_; }
  const ParamList& params() const { return params_; }

  // Serialization hooks for checkpoints.
  struct State {
    std::int64_t t = 0;
    std::vector<std::vector<double>> m, v;
  };
  State state() const;
  void restore(const State& s);

 private:
  ParamList params_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
};

// target <- (1 - tau) * target + tau * online, elementwise.
void soft_update(ParamList& target, const ParamList& online, double tau);

}  // namespace trajrl::nn
