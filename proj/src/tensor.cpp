#include "trajrl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "trajrl/kernels.hpp"

namespace trajrl::nn {

namespace {
bool g_debug_checks = false;

void check_finite(const std::vector<double>& v, const char* op) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NonFiniteValue(std::string(op) + " produced a non-finite value");
}

using NodePtr = std::shared_ptr<Node>;

Tensor make_op(Shape shape, std::vector<double> value,
               std::vector<NodePtr> parents,
               std::function<void(Node&)> backward_fn, const char* op_name) {
  if (g_debug_checks) check_finite(value, op_name);
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  for (const auto& p : parents)
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(n));
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeMismatch(msg);
}

}  // namespace

int shape_size(const Shape& s) {
  int n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i)
    os << s[i] << (i + 1 < s.size() ? "," : "");
  os << ']';
  return os.str();
}

void set_debug_checks(bool on) { g_debug_checks = on; }
bool debug_checks() { return g_debug_checks; }

Tensor Tensor::from(Shape shape, std::vector<double> value,
                    bool requires_grad) {
  require(shape_size(shape) == static_cast<int>(value.size()),
          "tensor value size does not match shape " + shape_str(shape));
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const int n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

double Tensor::item() const {
  require(size() == 1, "item() on non-scalar tensor");
  return node_->value[0];
}

Tensor Tensor::detach() const {
  return Tensor::from(node_->shape, node_->value, false);
}

double Tensor::grad_norm() const {
  double s = 0.0;
  for (double g : node_->grad) s += g * g;
  return std::sqrt(s);
}

void Tensor::backward() const {
  require(size() == 1, "backward() from a non-scalar");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS for a reverse topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, idx] = stack.back();
    if (idx < n->parents.size()) {
      Node* p = n->parents[idx++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) {
      n->ensure_grad();
      n->backward_fn(*n);
    }
  }
}

// ---------------------------------------------------------------- elementwise

namespace {
Tensor binary_elementwise(const Tensor& a, const Tensor& b, const char* name,
                          double (*fwd)(double, double), int mode) {
  require(a.shape() == b.shape(), std::string(name) + ": shape mismatch " +
                                      shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
  std::vector<double> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = fwd(a.value()[i], b.value()[i]);
  auto pa = a.node(), pb = b.node();
  return make_op(
      a.shape(), std::move(out), {pa, pb},
      [pa, pb, mode](Node& self) {
        const int n = static_cast<int>(self.value.size());
        if (pa->requires_grad) {
          pa->ensure_grad();
          for (int i = 0; i < n; ++i)
            pa->grad[i] += mode == 2 ? self.grad[i] * pb->value[i]
                                     : self.grad[i];
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (int i = 0; i < n; ++i) {
            if (mode == 0)
              pb->grad[i] += self.grad[i];
            else if (mode == 1)
              pb->grad[i] -= self.grad[i];
            else
              pb->grad[i] += self.grad[i] * pa->value[i];
          }
        }
      },
      name);
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "add", [](double x, double y) { return x + y; }, 0);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "sub", [](double x, double y) { return x - y; }, 1);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "mul", [](double x, double y) { return x * y; }, 2);
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = a.value()[i] * c;
  auto pa = a.node();
  return make_op(
      a.shape(), std::move(out), {pa},
      [pa, c](Node& self) {
        pa->ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          pa->grad[i] += self.grad[i] * c;
      },
      "scale");
}

Tensor add_scalar(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = a.value()[i] + c;
  auto pa = a.node();
  return make_op(
      a.shape(), std::move(out), {pa},
      [pa](Node& self) {
        pa->ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          pa->grad[i] += self.grad[i];
      },
      "add_scalar");
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.size());
  for (int i = 0; i < x.size(); ++i)
    out[i] = x.value()[i] > 0.0 ? x.value()[i] : 0.0;
  auto px = x.node();
  return make_op(
      x.shape(), std::move(out), {px},
      [px](Node& self) {
        px->ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          if (px->value[i] > 0.0) px->grad[i] += self.grad[i];
      },
      "relu");
}

Tensor tanh_op(const Tensor& x) {
  std::vector<double> out(x.size());
  for (int i = 0; i < x.size(); ++i) out[i] = std::tanh(x.value()[i]);
  auto px = x.node();
  return make_op(
      x.shape(), std::move(out), {px},
      [px](Node& self) {
        px->ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          px->grad[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
      },
      "tanh");
}

// --------------------------------------------------------------------- shape

Tensor reshape(const Tensor& x, Shape shape) {
  require(shape_size(shape) == x.size(), "reshape: element count mismatch");
  auto px = x.node();
  return make_op(
      std::move(shape), x.value(), {px},
      [px](Node& self) {
        px->ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i)
          px->grad[i] += self.grad[i];
      },
      "reshape");
}

Tensor concat_vec(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_vec: no parts");
  std::vector<double> out;
  std::vector<NodePtr> parents;
  std::vector<int> offsets;
  for (const auto& p : parts) {
    require(p.rank() == 1, "concat_vec: parts must be 1-D");
    offsets.push_back(static_cast<int>(out.size()));
    out.insert(out.end(), p.value().begin(), p.value().end());
    parents.push_back(p.node());
  }
  const int total = static_cast<int>(out.size());
  return make_op(
      {total}, std::move(out), parents,
      [parents, offsets](Node& self) {
        for (std::size_t i = 0; i < parents.size(); ++i) {
          if (!parents[i]->requires_grad) continue;
          parents[i]->ensure_grad();
          const int n = static_cast<int>(parents[i]->value.size());
          for (int j = 0; j < n; ++j)
            parents[i]->grad[j] += self.grad[offsets[i] + j];
        }
      },
      "concat_vec");
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_cols: no parts");
  const int rows = parts[0].dim(0);
  int total_cols = 0;
  std::vector<int> col_off;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    require(p.rank() == 2 && p.dim(0) == rows,
            "concat_cols: row count mismatch");
    col_off.push_back(total_cols);
    total_cols += p.dim(1);
    parents.push_back(p.node());
  }
  std::vector<double> out(static_cast<std::size_t>(rows) * total_cols);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const int nc = parts[i].dim(1);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < nc; ++c)
        out[r * total_cols + col_off[i] + c] = parts[i].value()[r * nc + c];
  }
  return make_op(
      {rows, total_cols}, std::move(out), parents,
      [parents, col_off, rows, total_cols](Node& self) {
        for (std::size_t i = 0; i < parents.size(); ++i) {
          if (!parents[i]->requires_grad) continue;
          parents[i]->ensure_grad();
          const int nc = static_cast<int>(parents[i]->shape[1]);
          for (int r = 0; r < rows; ++r)
            for (int c = 0; c < nc; ++c)
              parents[i]->grad[r * nc + c] +=
                  self.grad[r * total_cols + col_off[i] + c];
        }
      },
      "concat_cols");
}

Tensor slice_cols(const Tensor& x, int c0, int c1) {
  require(x.rank() == 2, "slice_cols: expects 2-D");
  const int rows = x.dim(0), cols = x.dim(1);
  require(0 <= c0 && c0 < c1 && c1 <= cols, "slice_cols: bad column range");
  const int nc = c1 - c0;
  std::vector<double> out(static_cast<std::size_t>(rows) * nc);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < nc; ++c) out[r * nc + c] = x.value()[r * cols + c0 + c];
  auto px = x.node();
  return make_op(
      {rows, nc}, std::move(out), {px},
      [px, rows, cols, c0, nc](Node& self) {
        px->ensure_grad();
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < nc; ++c)
            px->grad[r * cols + c0 + c] += self.grad[r * nc + c];
      },
      "slice_cols");
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  require(!rows.empty(), "stack_rows: no rows");
  const int n = rows[0].size();
  std::vector<double> out;
  out.reserve(rows.size() * n);
  std::vector<NodePtr> parents;
  for (const auto& r : rows) {
    require(r.rank() == 1 && r.size() == n, "stack_rows: row size mismatch");
    out.insert(out.end(), r.value().begin(), r.value().end());
    parents.push_back(r.node());
  }
  const int t = static_cast<int>(rows.size());
  return make_op(
      {t, n}, std::move(out), parents,
      [parents, n](Node& self) {
        for (std::size_t i = 0; i < parents.size(); ++i) {
          if (!parents[i]->requires_grad) continue;
          parents[i]->ensure_grad();
          for (int j = 0; j < n; ++j)
            parents[i]->grad[j] += self.grad[i * n + j];
        }
      },
      "stack_rows");
}

Tensor stack_scalars(const std::vector<Tensor>& scalars) {
  require(!scalars.empty(), "stack_scalars: empty");
  std::vector<double> out;
  std::vector<NodePtr> parents;
  for (const auto& s : scalars) {
    require(s.size() == 1, "stack_scalars: non-scalar part");
    out.push_back(s.value()[0]);
    parents.push_back(s.node());
  }
  const int n = static_cast<int>(out.size());
  return make_op(
      {n}, std::move(out), parents,
      [parents](Node& self) {
        for (std::size_t i = 0; i < parents.size(); ++i) {
          if (!parents[i]->requires_grad) continue;
          parents[i]->ensure_grad();
          parents[i]->grad[0] += self.grad[i];
        }
      },
      "stack_scalars");
}

// ------------------------------------------------------------ linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
          "matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
              shape_str(b.shape()));
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  kernels::gemm(false, false, m, n, k, a.value().data(), b.value().data(),
                out.data(), false);
  auto pa = a.node(), pb = b.node();
  return make_op(
      {m, n}, std::move(out), {pa, pb},
      [pa, pb, m, n, k](Node& self) {
        if (pa->requires_grad) {
          pa->ensure_grad();
          kernels::gemm(false, true, m, k, n, self.grad.data(),
                        pb->value.data(), pa->grad.data(), true);
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          kernels::gemm(true, false, k, n, m, pa->value.data(),
                        self.grad.data(), pb->grad.data(), true);
        }
      },
      "matmul");
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(1),
          "matmul_nt: incompatible shapes");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(0);
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  kernels::gemm(false, true, m, n, k, a.value().data(), b.value().data(),
                out.data(), false);
  auto pa = a.node(), pb = b.node();
  return make_op(
      {m, n}, std::move(out), {pa, pb},
      [pa, pb, m, n, k](Node& self) {
        if (pa->requires_grad) {
          pa->ensure_grad();
          kernels::gemm(false, false, m, k, n, self.grad.data(),
                        pb->value.data(), pa->grad.data(), true);
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          kernels::gemm(true, false, n, k, m, self.grad.data(),
                        pa->value.data(), pb->grad.data(), true);
        }
      },
      "matmul_nt");
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(x.rank() == 1 && w.rank() == 2 && w.dim(1) == x.size() &&
              b.rank() == 1 && b.size() == w.dim(0),
          "affine: incompatible shapes");
  const int m = w.dim(0), n = x.size();
  std::vector<double> out(m);
  kernels::gemm(false, false, m, 1, n, w.value().data(), x.value().data(),
                out.data(), false);
  for (int i = 0; i < m; ++i) out[i] += b.value()[i];
  auto px = x.node(), pw = w.node(), pb = b.node();
  return make_op(
      {m}, std::move(out), {px, pw, pb},
      [px, pw, pb, m, n](Node& self) {
        if (px->requires_grad) {
          px->ensure_grad();
          kernels::gemm(true, false, n, 1, m, pw->value.data(),
                        self.grad.data(), px->grad.data(), true);
        }
        if (pw->requires_grad) {
          pw->ensure_grad();
          kernels::gemm(false, false, m, n, 1, self.grad.data(),
                        px->value.data(), pw->grad.data(), true);
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (int i = 0; i < m; ++i) pb->grad[i] += self.grad[i];
        }
      },
      "affine");
}

Tensor linear_rows(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(x.rank() == 2 && w.rank() == 2 && x.dim(1) == w.dim(1) &&
              b.rank() == 1 && b.size() == w.dim(0),
          "linear_rows: incompatible shapes");
  const int t = x.dim(0), n = x.dim(1), m = w.dim(0);
  std::vector<double> out(static_cast<std::size_t>(t) * m);
  kernels::gemm(false, true, t, m, n, x.value().data(), w.value().data(),
                out.data(), false);
  for (int r = 0; r < t; ++r)
    for (int j = 0; j < m; ++j) out[r * m + j] += b.value()[j];
  auto px = x.node(), pw = w.node(), pb = b.node();
  return make_op(
      {t, m}, std::move(out), {px, pw, pb},
      [px, pw, pb, t, n, m](Node& self) {
        if (px->requires_grad) {
          px->ensure_grad();
          kernels::gemm(false, false, t, n, m, self.grad.data(),
                        pw->value.data(), px->grad.data(), true);
        }
        if (pw->requires_grad) {
          pw->ensure_grad();
          kernels::gemm(true, false, m, n, t, self.grad.data(),
                        px->value.data(), pw->grad.data(), true);
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (int r = 0; r < t; ++r)
            for (int j = 0; j < m; ++j) pb->grad[j] += self.grad[r * m + j];
        }
      },
      "linear_rows");
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  require(x.rank() == 2 && v.rank() == 1 && v.size() == x.dim(1),
          "add_rowvec: incompatible shapes");
  const int t = x.dim(0), n = x.dim(1);
  std::vector<double> out(x.value());
  for (int r = 0; r < t; ++r)
    for (int j = 0; j < n; ++j) out[r * n + j] += v.value()[j];
  auto px = x.node(), pv = v.node();
  return make_op(
      {t, n}, std::move(out), {px, pv},
      [px, pv, t, n](Node& self) {
        if (px->requires_grad) {
          px->ensure_grad();
          for (std::size_t i = 0; i < self.value.size(); ++i)
            px->grad[i] += self.grad[i];
        }
        if (pv->requires_grad) {
          pv->ensure_grad();
          for (int r = 0; r < t; ++r)
            for (int j = 0; j < n; ++j) pv->grad[j] += self.grad[r * n + j];
        }
      },
      "add_rowvec");
}

// ------------------------------------------------------------- conv, pooling

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
              int pad) {
  require(x.rank() == 3 && w.rank() == 4 && w.dim(1) == x.dim(0) &&
              b.rank() == 1 && b.size() == w.dim(0),
          "conv2d: incompatible shapes");
  const int c_in = x.dim(0), h = x.dim(1), ww = x.dim(2);
  const int c_out = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (ww + 2 * pad - kw) / stride + 1;
  require(oh > 0 && ow > 0, "conv2d: empty output");
  std::vector<double> out(static_cast<std::size_t>(c_out) * oh * ow);
  kernels::conv2d_forward(x.value().data(), c_in, h, ww, w.value().data(),
                          c_out, kh, kw, b.value().data(), stride, pad,
                          out.data(), oh, ow);
  auto px = x.node(), pw = w.node(), pb = b.node();
  return make_op(
      {c_out, oh, ow}, std::move(out), {px, pw, pb},
      [px, pw, pb, c_in, h, ww, c_out, kh, kw, stride, pad, oh,
       ow](Node& self) {
        if (px->requires_grad) {
          px->ensure_grad();
          kernels::conv2d_backward_input(self.grad.data(), c_out, oh, ow,
                                         pw->value.data(), c_in, kh, kw, h, ww,
                                         stride, pad, px->grad.data());
        }
        if (pw->requires_grad) {
          pw->ensure_grad();
          kernels::conv2d_backward_weight(self.grad.data(), c_out, oh, ow,
                                          px->value.data(), c_in, h, ww, kh,
                                          kw, stride, pad, pw->grad.data());
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          kernels::conv2d_backward_bias(self.grad.data(), c_out, oh, ow,
                                        pb->grad.data());
        }
      },
      "conv2d");
}

Tensor max_pool2d(const Tensor& x, int k, int stride) {
  require(x.rank() == 3, "max_pool2d: expects CHW");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int oh = (h - k) / stride + 1;
  const int ow = (w - k) / stride + 1;
  require(oh > 0 && ow > 0, "max_pool2d: empty output");
  std::vector<double> out(static_cast<std::size_t>(c) * oh * ow);
  auto argmax = std::make_shared<std::vector<int>>(out.size());
  kernels::maxpool_forward(x.value().data(), c, h, w, k, stride, out.data(),
                           oh, ow, argmax->data());
  auto px = x.node();
  return make_op(
      {c, oh, ow}, std::move(out), {px},
      [px, argmax](Node& self) {
        px->ensure_grad();
        kernels::maxpool_backward(self.grad.data(),
                                  static_cast<int>(self.value.size()),
                                  argmax->data(), px->grad.data());
      },
      "max_pool2d");
}

// ------------------------------------------------- reductions, normalization

namespace {
// Rows view: 1-D tensors are a single row.
void rows_of(const Tensor& x, int& rows, int& cols) {
  if (x.rank() == 1) {
    rows = 1;
    cols = x.size();
  } else if (x.rank() == 2) {
    rows = x.dim(0);
    cols = x.dim(1);
  } else {
    throw ShapeMismatch("row-wise op expects 1-D or 2-D input");
  }
}
}  // namespace

Tensor softmax_rows(const Tensor& x) {
  int rows, cols;
  rows_of(x, rows, cols);
  std::vector<double> out(x.size());
  for (int r = 0; r < rows; ++r) {
    const double* in = x.value().data() + r * cols;
    double mx = in[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    double z = 0.0;
    for (int j = 0; j < cols; ++j) z += std::exp(in[j] - mx);
    for (int j = 0; j < cols; ++j) out[r * cols + j] = std::exp(in[j] - mx) / z;
  }
  auto px = x.node();
  return make_op(
      x.shape(), std::move(out), {px},
      [px, rows, cols](Node& self) {
        px->ensure_grad();
        for (int r = 0; r < rows; ++r) {
          const double* y = self.value.data() + r * cols;
          const double* g = self.grad.data() + r * cols;
          double dot = 0.0;
          for (int j = 0; j < cols; ++j) dot += g[j] * y[j];
          for (int j = 0; j < cols; ++j)
            px->grad[r * cols + j] += y[j] * (g[j] - dot);
        }
      },
      "softmax");
}

Tensor log_softmax_rows(const Tensor& x) {
  int rows, cols;
  rows_of(x, rows, cols);
  std::vector<double> out(x.size());
  for (int r = 0; r < rows; ++r) {
    const double* in = x.value().data() + r * cols;
    double mx = in[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    double z = 0.0;
    for (int j = 0; j < cols; ++j) z += std::exp(in[j] - mx);
    const double lse = mx + std::log(z);
    for (int j = 0; j < cols; ++j) out[r * cols + j] = in[j] - lse;
  }
  auto px = x.node();
  return make_op(
      x.shape(), std::move(out), {px},
      [px, rows, cols](Node& self) {
        px->ensure_grad();
        for (int r = 0; r < rows; ++r) {
          const double* y = self.value.data() + r * cols;
          const double* g = self.grad.data() + r * cols;
          double gsum = 0.0;
          for (int j = 0; j < cols; ++j) gsum += g[j];
          for (int j = 0; j < cols; ++j)
            px->grad[r * cols + j] += g[j] - std::exp(y[j]) * gsum;
        }
      },
      "log_softmax");
}

Tensor logsumexp_rows(const Tensor& x) {
  int rows, cols;
  rows_of(x, rows, cols);
  std::vector<double> out(rows);
  for (int r = 0; r < rows; ++r) {
    const double* in = x.value().data() + r * cols;
    double mx = in[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    double z = 0.0;
    for (int j = 0; j < cols; ++j) z += std::exp(in[j] - mx);
    out[r] = mx + std::log(z);
  }
  auto px = x.node();
  const Shape out_shape = (x.rank() == 1) ? Shape{1} : Shape{rows};
  return make_op(
      out_shape, std::move(out), {px},
      [px, rows, cols](Node& self) {
        px->ensure_grad();
        for (int r = 0; r < rows; ++r)
          for (int j = 0; j < cols; ++j)
            px->grad[r * cols + j] +=
                self.grad[r] *
                std::exp(px->value[r * cols + j] - self.value[r]);
      },
      "logsumexp");
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                       double eps) {
  int rows, cols;
  rows_of(x, rows, cols);
  require(gain.rank() == 1 && gain.size() == cols && bias.rank() == 1 &&
              bias.size() == cols,
          "layer_norm: gain/bias size mismatch");
  std::vector<double> out(x.size());
  auto stats = std::make_shared<std::vector<double>>(2 * rows);  // mu, sigma
  for (int r = 0; r < rows; ++r) {
    const double* in = x.value().data() + r * cols;
    double mu = 0.0;
    for (int j = 0; j < cols; ++j) mu += in[j];
    mu /= cols;
    double var = 0.0;
    for (int j = 0; j < cols; ++j) var += (in[j] - mu) * (in[j] - mu);
    var /= cols;
    const double sigma = std::sqrt(var + eps);
    (*stats)[2 * r] = mu;
    (*stats)[2 * r + 1] = sigma;
    for (int j = 0; j < cols; ++j)
      out[r * cols + j] =
          (in[j] - mu) / sigma * gain.value()[j] + bias.value()[j];
  }
  auto px = x.node(), pg = gain.node(), pb = bias.node();
  return make_op(
      x.shape(), std::move(out), {px, pg, pb},
      [px, pg, pb, rows, cols, stats](Node& self) {
        for (int r = 0; r < rows; ++r) {
          const double mu = (*stats)[2 * r];
          const double sigma = (*stats)[2 * r + 1];
          const double* in = px->value.data() + r * cols;
          const double* g = self.grad.data() + r * cols;
          if (pg->requires_grad) {
            pg->ensure_grad();
            for (int j = 0; j < cols; ++j)
              pg->grad[j] += g[j] * (in[j] - mu) / sigma;
          }
          if (pb->requires_grad) {
            pb->ensure_grad();
            for (int j = 0; j < cols; ++j) pb->grad[j] += g[j];
          }
          if (px->requires_grad) {
            px->ensure_grad();
            // dxhat, then the standard layer-norm input gradient.
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (int j = 0; j < cols; ++j) {
              const double xhat = (in[j] - mu) / sigma;
              const double dxhat = g[j] * pg->value[j];
              sum_dxhat += dxhat;
              sum_dxhat_xhat += dxhat * xhat;
            }
            for (int j = 0; j < cols; ++j) {
              const double xhat = (in[j] - mu) / sigma;
              const double dxhat = g[j] * pg->value[j];
              px->grad[r * cols + j] +=
                  (dxhat - sum_dxhat / cols - xhat * sum_dxhat_xhat / cols) /
                  sigma;
            }
          }
        }
      },
      "layer_norm");
}

Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.value()) s += v;
  auto px = x.node();
  return make_op(
      {1}, {s}, {px},
      [px](Node& self) {
        px->ensure_grad();
        for (std::size_t i = 0; i < px->value.size(); ++i)
          px->grad[i] += self.grad[0];
      },
      "sum_all");
}

Tensor mean_all(const Tensor& x) {
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x.value()) s += v;
  auto px = x.node();
  return make_op(
      {1}, {s / n}, {px},
      [px, n](Node& self) {
        px->ensure_grad();
        for (std::size_t i = 0; i < px->value.size(); ++i)
          px->grad[i] += self.grad[0] / n;
      },
      "mean_all");
}

Tensor masked_mean_rows(const Tensor& x,
                        const std::vector<std::uint8_t>& valid) {
  require(x.rank() == 2 && valid.size() == static_cast<std::size_t>(x.dim(0)),
          "masked_mean_rows: mask length mismatch");
  const int t = x.dim(0), n = x.dim(1);
  int cnt = 0;
  for (auto v : valid) cnt += v ? 1 : 0;
  require(cnt > 0, "masked_mean_rows: no valid rows");
  std::vector<double> out(n, 0.0);
  for (int r = 0; r < t; ++r)
    if (valid[r])
      for (int j = 0; j < n; ++j) out[j] += x.value()[r * n + j];
  for (int j = 0; j < n; ++j) out[j] /= cnt;
  auto px = x.node();
  return make_op(
      {n}, std::move(out), {px},
      [px, valid, t, n, cnt](Node& self) {
        px->ensure_grad();
        for (int r = 0; r < t; ++r)
          if (valid[r])
            for (int j = 0; j < n; ++j)
              px->grad[r * n + j] += self.grad[j] / cnt;
      },
      "masked_mean_rows");
}

// ------------------------------------------------------------------ indexing

Tensor gather_rows(const Tensor& x, const std::vector<int>& idx) {
  if (x.rank() == 1) {
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      require(idx[i] >= 0 && idx[i] < x.size(), "gather: index out of range");
      out[i] = x.value()[idx[i]];
    }
    auto px = x.node();
    return make_op(
        {static_cast<int>(idx.size())}, std::move(out), {px},
        [px, idx](Node& self) {
          px->ensure_grad();
          for (std::size_t i = 0; i < idx.size(); ++i)
            px->grad[idx[i]] += self.grad[i];
        },
        "gather");
  }
  require(x.rank() == 2, "gather_rows: expects 1-D or 2-D");
  const int n = x.dim(1);
  std::vector<double> out(idx.size() * n);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && idx[i] < x.dim(0), "gather: row out of range");
    std::copy_n(x.value().data() + idx[i] * n, n, out.data() + i * n);
  }
  auto px = x.node();
  return make_op(
      {static_cast<int>(idx.size()), n}, std::move(out), {px},
      [px, idx, n](Node& self) {
        px->ensure_grad();
        for (std::size_t i = 0; i < idx.size(); ++i)
          for (int j = 0; j < n; ++j)
            px->grad[idx[i] * n + j] += self.grad[i * n + j];
      },
      "gather_rows");
}

Tensor at(const Tensor& x, int index) {
  require(x.rank() == 1, "at: expects 1-D");
  return gather_rows(x, {index});
}

// -------------------------------------------------------------------- losses

Tensor mse(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mse: shape mismatch");
  const int n = a.size();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = a.value()[i] - b.value()[i];
    s += d * d;
  }
  auto pa = a.node(), pb = b.node();
  return make_op(
      {1}, {s / n}, {pa, pb},
      [pa, pb, n](Node& self) {
        const double g = self.grad[0] * 2.0 / n;
        for (int i = 0; i < n; ++i) {
          const double d = pa->value[i] - pb->value[i];
          if (pa->requires_grad) {
            pa->ensure_grad();
            pa->grad[i] += g * d;
          }
          if (pb->requires_grad) {
            pb->ensure_grad();
            pb->grad[i] -= g * d;
          }
        }
      },
      "mse");
}

Tensor cross_entropy_logits(const Tensor& logits, int target) {
  require(logits.rank() == 1, "cross_entropy: expects 1-D logits");
  require(target >= 0 && target < logits.size(),
          "cross_entropy: target out of range");
  const int n = logits.size();
  const double* in = logits.value().data();
  double mx = in[0];
  for (int j = 1; j < n; ++j) mx = std::max(mx, in[j]);
  double z = 0.0;
  for (int j = 0; j < n; ++j) z += std::exp(in[j] - mx);
  const double lse = mx + std::log(z);
  auto px = logits.node();
  return make_op(
      {1}, {lse - in[target]}, {px},
      [px, target, n, lse](Node& self) {
        px->ensure_grad();
        const double g = self.grad[0];
        for (int j = 0; j < n; ++j) {
          const double p = std::exp(px->value[j] - lse);
          px->grad[j] += g * (p - (j == target ? 1.0 : 0.0));
        }
      },
      "cross_entropy");
}

// ----------------------------------------------------------------- attention

Tensor masked_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                        const std::vector<std::uint8_t>& valid) {
  require(q.rank() == 2 && k.rank() == 2 && v.rank() == 2, "attention: 2-D");
  require(q.dim(1) == k.dim(1) && k.dim(0) == v.dim(0),
          "attention: incompatible shapes");
  require(valid.size() == static_cast<std::size_t>(k.dim(0)),
          "attention: mask length mismatch");
  const int tk = k.dim(0);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.dim(1)));

  Tensor scores = scale(matmul_nt(q, k), inv_sqrt_d);
  // Additive key mask; -1e30 underflows to exactly zero weight after softmax.
  std::vector<double> bias_row(tk, 0.0);
  for (int j = 0; j < tk; ++j)
    if (!valid[j]) bias_row[j] = -1e30;
  Tensor bias = Tensor::from({tk}, std::move(bias_row));
  Tensor weights = softmax_rows(add_rowvec(scores, bias));
  return matmul(weights, v);
}

}  // namespace trajrl::nn
