#include "trajrl/optim.hpp"

#include <cmath>

namespace trajrl::nn {

double cosine_lr(double lr0, int t, int total, double floor_frac) {
  const double floor = floor_frac * lr0;
  if (total <= 0) return lr0;
  const double phase = M_PI * static_cast<double>(t) / total;
  return floor + 0.5 * (lr0 - floor) * (1.0 + std::cos(phase));
}

Adam::Adam(ParamList params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

void Adam::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& tensor = params_[i].tensor;
    const auto& g = tensor.grad();
    if (g.empty()) continue;  // no gradient flowed this step
    auto& value = tensor.mutable_value();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      value[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

Adam::State Adam::state() const { return State{t_, m_, v_}; }

void Adam::restore(const State& s) {
  t_ = s.t;
  m_ = s.m;
  v_ = s.v;
}

void soft_update(ParamList& target, const ParamList& online, double tau) {
  if (target.size() != online.size())
    throw ShapeMismatch("soft_update: parameter list size mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto& tv = target[i].tensor.mutable_value();
    const auto& ov = online[i].tensor.value();
    if (tv.size() != ov.size())
      throw ShapeMismatch("soft_update: parameter shape mismatch at " +
                          target[i].name);
    for (std::size_t j = 0; j < tv.size(); ++j)
      tv[j] = (1.0 - tau) * tv[j] + tau * ov[j];
  }
}

}  // namespace trajrl::nn
