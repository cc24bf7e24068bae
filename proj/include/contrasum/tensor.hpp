#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace contrasum {

// Reverse-mode autodiff over dense row-major float64 tensors (rank 1 or 2).
//
// Every op allocates a fresh node; nodes keep shared ownership of their
// inputs, so a forward pass builds a DAG that lives as long as its outputs.
// backward() linearizes the DAG reachable from a scalar loss into a tape
// (topological order), seeds d(loss)/d(loss) = 1 and walks the tape once in
// reverse, accumulating into the grad buffer of every requires-grad node.
struct TensorNode;

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<size_t> shape, bool requires_grad = false);
  static Tensor from(std::vector<size_t> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<size_t>& shape() const;
  size_t size() const;
  // Row/column view of the shape: rank-1 tensors count as a single row.
  size_t rows() const;
  size_t cols() const;

  std::vector<double>& value();
  const std::vector<double>& value() const;
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  bool requires_grad() const;
  // Toggles gradient tracking in place (used for layer freezing). Enabling
  // allocates a zeroed grad buffer; disabling drops it.
  void set_requires_grad(bool on);

  double item() const;  // value of a single-element tensor
  void zero_grad();

  TensorNode* node() const { return node_.get(); }

 private:
  friend Tensor make_op(std::vector<size_t> shape, std::vector<Tensor> inputs,
                        std::function<void(TensorNode&)> backprop);
  friend void backward(const Tensor& loss);

  std::shared_ptr<TensorNode> node_;
};

struct TensorNode {
  std::vector<size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // same length as value when requires_grad
  bool requires_grad = false;
  std::vector<Tensor> inputs;
  // Reads this->grad, accumulates into inputs' grads. Cleared after backward.
  std::function<void(TensorNode&)> backprop;
};

// ---- forward ops (differentiable unless noted) ----

// a (m x k) times b (k x n) -> (m x n). Rank-1 operands are treated as a
// single row; result keeps rank 2.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise sum. Shapes must match, except that a rank-1 b of length
// cols(a) broadcasts across the rows of a.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor scale(const Tensor& a, double s);

// Stack parts vertically (equal column counts) / horizontally (equal rows).
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);

// Half-open row/column ranges.
Tensor slice_rows(const Tensor& a, size_t begin, size_t end);
Tensor slice_cols(const Tensor& a, size_t begin, size_t end);

// Rows of `table` selected by token id; gradient scatters back into table.
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);

Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

// Per-row normalization to mean 0 / variance 1 (biased variance, epsilon
// inside the square root), then the affine y * gain + bias with rank-1 gain
// and bias of length cols(x).
Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps = 1e-12);

// Row-wise softmax with max subtraction; axis -1/1 = rows (the default),
// axis 0 = columns.
Tensor softmax(const Tensor& a, int axis = -1);
Tensor log_softmax_rows(const Tensor& a);

// Row-wise log(sum(exp(x))), max-stabilized; (m x n) -> (m).
Tensor row_logsumexp(const Tensor& a);

// Rows scaled to unit L2 norm; denominators clamped below by eps.
Tensor row_l2_normalize(const Tensor& a, double eps = 1e-12);

// out[i] = a[i, cols[i]]; (m x n) -> (m).
Tensor take_per_row(const Tensor& a, const std::vector<size_t>& cols);

Tensor sum(const Tensor& a);   // scalar
Tensor mean(const Tensor& a);  // scalar
Tensor transpose(const Tensor& a);

// Accumulates gradients of every requires-grad tensor reachable from `loss`
// (which must be scalar), then clears the tape edges it visited.
void backward(const Tensor& loss);

std::string shape_str(const std::vector<size_t>& shape);

}  // namespace contrasum
