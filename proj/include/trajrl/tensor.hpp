#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal reverse-mode autodiff, double precision, define-by-run. The graph
// is rebuilt per step; parameters are persistent leaf tensors whose value
// buffers the optimizers write through.

namespace trajrl::nn {

struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NonFiniteValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<int>;

int shape_size(const Shape& s);
std::string shape_str(const Shape& s);

// When enabled, every op forward-checks its outputs for NaN/Inf.
void set_debug_checks(bool on);
bool debug_checks();

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // lazily allocated
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> value,
                     bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double v);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int size() const { return static_cast<int>(node_->value.size()); }
  int dim(int i) const { return node_->shape[i]; }
  int rank() const { return static_cast<int>(node_->shape.size()); }

  const std::vector<double>& value() const { return node_->value; }
  std::vector<double>& mutable_value() { return node_->value; }
  // Empty until gradients have flowed into this node.
  const std::vector<double>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  double item() const;

  // Copy of the values with no graph linkage; gradients never flow through.
  Tensor detach() const;
  // Freeze/unfreeze a leaf (used for lagged target networks).
  void set_requires_grad(bool v) const { node_->requires_grad = v; }
  // Reverse-mode sweep from a scalar.
  void backward() const;
  void zero_grad() const { node_->grad.clear(); }

  double grad_norm() const;

  std::shared_ptr<Node> node() const { return node_; }
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<Node> node_;
};

// --- elementwise ---
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor relu(const Tensor& x);
Tensor tanh_op(const Tensor& x);

// --- shape ---
Tensor reshape(const Tensor& x, Shape shape);
Tensor concat_vec(const std::vector<Tensor>& parts);       // 1-D pieces
Tensor concat_cols(const std::vector<Tensor>& parts);      // [T, n_i] pieces
Tensor slice_cols(const Tensor& x, int c0, int c1);        // [T, n] columns
Tensor stack_rows(const std::vector<Tensor>& rows);        // 1-D rows -> [T,n]
Tensor stack_scalars(const std::vector<Tensor>& scalars);  // -> [n]

// --- linear algebra ---
Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k] x [k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // A * B^T, B is [n,k]
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);  // W x + b
// Rows through a linear layer: X [T,n] -> X W^T + b, W [m,n].
Tensor linear_rows(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor add_rowvec(const Tensor& x, const Tensor& v);  // broadcast over rows

// --- conv / pooling (CHW) ---
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
              int pad);
Tensor max_pool2d(const Tensor& x, int k, int stride);

// --- reductions / normalizations (last axis = rows for 2-D, whole for 1-D)
Tensor softmax_rows(const Tensor& x);
Tensor log_softmax_rows(const Tensor& x);
Tensor logsumexp_rows(const Tensor& x);  // [T,n] -> [T]; [n] -> scalar
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                       double eps = 1e-5);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);
Tensor masked_mean_rows(const Tensor& x, const std::vector<std::uint8_t>& valid);

// --- indexing ---
Tensor gather_rows(const Tensor& x, const std::vector<int>& idx);
Tensor at(const Tensor& x, int index);  // 1-D element -> scalar

// --- losses ---
Tensor mse(const Tensor& a, const Tensor& b);
Tensor cross_entropy_logits(const Tensor& logits, int target);

// --- attention ---
// Scaled dot-product attention over rows of Q,K,V ([T,d] each); keys with
// valid[j] == 0 receive exactly zero weight.
Tensor masked_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                        const std::vector<std::uint8_t>& valid);

}  // namespace trajrl::nn
