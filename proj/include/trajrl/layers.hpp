#pragma once

#include <string>

#include "trajrl/common.hpp"
#include "trajrl/optim.hpp"
#include "trajrl/tensor.hpp"

namespace trajrl::nn {

struct Linear {
  Tensor w, b;  // w is [out, in]

  void init(Rng& rng, int in, int out, double w_scale) {
    std::vector<double> wv(static_cast<std::size_t>(out) * in);
    for (auto& x : wv) x = rng.normal(0.0, w_scale);
    w = Tensor::from({out, in}, std::move(wv), true);
    b = Tensor::zeros({out}, true);
  }
  static double he(int fan_in) { return std::sqrt(2.0 / fan_in); }
  static double xavier(int fan_in) { return std::sqrt(1.0 / fan_in); }

  Tensor operator()(const Tensor& x) const {
    return x.rank() == 1 ? affine(x, w, b) : linear_rows(x, w, b);
  }
  void collect(ParamList& out, const std::string& prefix) const {
    out.push_back({prefix + ".w", w});
    out.push_back({prefix + ".b", b});
  }
};

struct Conv2dLayer {
  Tensor w, b;  // w is [out_c, in_c, k, k]
  int stride = 1, pad = 0;

  void init(Rng& rng, int in_c, int out_c, int k, int stride_, int pad_) {
    stride = stride_;
    pad = pad_;
    std::vector<double> wv(static_cast<std::size_t>(out_c) * in_c * k * k);
    const double s = std::sqrt(2.0 / (in_c * k * k));
    for (auto& x : wv) x = rng.normal(0.0, s);
    w = Tensor::from({out_c, in_c, k, k}, std::move(wv), true);
    b = Tensor::zeros({out_c}, true);
  }
  Tensor operator()(const Tensor& x) const { return conv2d(x, w, b, stride, pad); }
  void collect(ParamList& out, const std::string& prefix) const {
    out.push_back({prefix + ".w", w});
    out.push_back({prefix + ".b", b});
  }
};

struct LayerNorm {
  Tensor gain, bias;
  void init(int n) {
    gain = Tensor::from({n}, std::vector<double>(n, 1.0), true);
    bias = Tensor::zeros({n}, true);
  }
  Tensor operator()(const Tensor& x) const {
    return layer_norm_rows(x, gain, bias);
  }
  void collect(ParamList& out, const std::string& prefix) const {
    out.push_back({prefix + ".gain", gain});
    out.push_back({prefix + ".bias", bias});
  }
};

// Two-layer perceptron with relu.
struct MLP {
  Linear l1, l2;
  void init(Rng& rng, int in, int hidden, int out, double out_scale) {
    l1.init(rng, in, hidden, Linear::he(in));
    l2.init(rng, hidden, out, out_scale);
  }
  Tensor operator()(const Tensor& x) const { return l2(relu(l1(x))); }
  void collect(ParamList& out, const std::string& prefix) const {
    l1.collect(out, prefix + ".l1");
    l2.collect(out, prefix + ".l2");
  }
};

}  // namespace trajrl::nn
