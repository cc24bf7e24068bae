#include "contrasum/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "contrasum/errors.hpp"
#include "contrasum/kernels.hpp"

namespace contrasum {

namespace {

size_t shape_elems(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

size_t shape_rows(const std::vector<size_t>& shape) {
  return shape.size() == 2 ? shape[0] : 1;
}

size_t shape_cols(const std::vector<size_t>& shape) {
  return shape.size() == 2 ? shape[1] : (shape.empty() ? 0 : shape[0]);
}

void check_rank(const std::vector<size_t>& shape, const char* op) {
  if (shape.empty() || shape.size() > 2) {
    throw ShapeError(std::string(op) + ": rank must be 1 or 2, got " +
                     shape_str(shape));
  }
  for (size_t d : shape) {
    if (d == 0) {
      throw ShapeError(std::string(op) + ": zero dimension in " +
                       shape_str(shape));
    }
  }
}

[[noreturn]] void shape_mismatch(const char* op, const std::vector<size_t>& a,
                                 const std::vector<size_t>& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) +
                   " and " + shape_str(b));
}

}  // namespace

std::string shape_str(const std::vector<size_t>& shape) {
  std::string s = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += " x ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

// ---- Tensor basics ----

Tensor make_op(std::vector<size_t> shape, std::vector<Tensor> inputs,
               std::function<void(TensorNode&)> backprop) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value.resize(shape_elems(node->shape), 0.0);
  for (const Tensor& in : inputs) {
    if (in.requires_grad()) {
      node->requires_grad = true;
      break;
    }
  }
  if (node->requires_grad) {
    node->grad.assign(node->value.size(), 0.0);
    node->inputs = std::move(inputs);
    node->backprop = std::move(backprop);
  } else {
    // Keep the forward inputs alive only as long as needed to fill value;
    // callers read input values right after make_op, so nothing to retain.
  }
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

Tensor Tensor::zeros(std::vector<size_t> shape, bool requires_grad) {
  check_rank(shape, "zeros");
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value.assign(shape_elems(node->shape), 0.0);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->value.size(), 0.0);
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

Tensor Tensor::from(std::vector<size_t> shape, std::vector<double> values,
                    bool requires_grad) {
  check_rank(shape, "from");
  if (values.size() != shape_elems(shape)) {
    throw ShapeError("from: " + std::to_string(values.size()) +
                     " values for shape " + shape_str(shape));
  }
  Tensor t = zeros(std::move(shape), requires_grad);
  t.value() = std::move(values);
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

const std::vector<size_t>& Tensor::shape() const { return node_->shape; }
size_t Tensor::size() const { return node_->value.size(); }
size_t Tensor::rows() const { return shape_rows(node_->shape); }
size_t Tensor::cols() const { return shape_cols(node_->shape); }

std::vector<double>& Tensor::value() { return node_->value; }
const std::vector<double>& Tensor::value() const { return node_->value; }
std::vector<double>& Tensor::grad() { return node_->grad; }
const std::vector<double>& Tensor::grad() const { return node_->grad; }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  node_->requires_grad = on;
  if (on) {
    node_->grad.assign(node_->value.size(), 0.0);
  } else {
    node_->grad.clear();
  }
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item: tensor has " + std::to_string(size()) +
                        " elements");
  }
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (requires_grad()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

// ---- ops ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_rank(a.shape(), "matmul");
  check_rank(b.shape(), "matmul");
  if (b.shape().size() != 2 || a.cols() != b.rows()) {
    shape_mismatch("matmul", a.shape(), b.shape());
  }
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = make_op({m, n}, {a, b}, [m, k, n](TensorNode& self) {
    const auto& ka = kernels::active();
    Tensor& a = self.inputs[0];
    Tensor& b = self.inputs[1];
    if (a.requires_grad()) {
      std::vector<double> bt(k * n), da(m * k);
      ka.transpose(b.value().data(), bt.data(), k, n);
      ka.matmul(self.grad.data(), bt.data(), da.data(), m, n, k);
      ka.axpy(1.0, da.data(), a.grad().data(), m * k);
    }
    if (b.requires_grad()) {
      std::vector<double> at(m * k), db(k * n);
      ka.transpose(a.value().data(), at.data(), m, k);
      ka.matmul(at.data(), self.grad.data(), db.data(), k, m, n);
      ka.axpy(1.0, db.data(), b.grad().data(), k * n);
    }
  });
  kernels::active().matmul(a.value().data(), b.value().data(),
                           out.value().data(), m, k, n);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_rank(a.shape(), "add");
  check_rank(b.shape(), "add");
  const bool same = a.rows() == b.rows() && a.cols() == b.cols();
  const bool row_bcast =
      !same && b.shape().size() == 1 && b.cols() == a.cols() && a.rows() > 1;
  if (!same && !row_bcast) shape_mismatch("add", a.shape(), b.shape());

  const size_t rows = a.rows(), cols = a.cols();
  Tensor out =
      make_op(a.shape(), {a, b}, [same, rows, cols](TensorNode& self) {
        const auto& ka = kernels::active();
        Tensor& a = self.inputs[0];
        Tensor& b = self.inputs[1];
        if (a.requires_grad()) {
          ka.axpy(1.0, self.grad.data(), a.grad().data(), self.grad.size());
        }
        if (b.requires_grad()) {
          if (same) {
            ka.axpy(1.0, self.grad.data(), b.grad().data(), self.grad.size());
          } else {
            for (size_t r = 0; r < rows; ++r) {
              ka.axpy(1.0, self.grad.data() + r * cols, b.grad().data(), cols);
            }
          }
        }
      });
  if (same) {
    kernels::active().add(a.value().data(), b.value().data(),
                          out.value().data(), a.size());
  } else {
    for (size_t r = 0; r < rows; ++r) {
      kernels::active().add(a.value().data() + r * cols, b.value().data(),
                            out.value().data() + r * cols, cols);
    }
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_rank(a.shape(), "sub");
  check_rank(b.shape(), "sub");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    shape_mismatch("sub", a.shape(), b.shape());
  }
  Tensor out = make_op(a.shape(), {a, b}, [](TensorNode& self) {
    const auto& ka = kernels::active();
    Tensor& a = self.inputs[0];
    Tensor& b = self.inputs[1];
    if (a.requires_grad()) {
      ka.axpy(1.0, self.grad.data(), a.grad().data(), self.grad.size());
    }
    if (b.requires_grad()) {
      ka.axpy(-1.0, self.grad.data(), b.grad().data(), self.grad.size());
    }
  });
  kernels::active().sub(a.value().data(), b.value().data(), out.value().data(),
                        a.size());
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_rank(a.shape(), "mul");
  check_rank(b.shape(), "mul");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    shape_mismatch("mul", a.shape(), b.shape());
  }
  Tensor out = make_op(a.shape(), {a, b}, [](TensorNode& self) {
    Tensor& a = self.inputs[0];
    Tensor& b = self.inputs[1];
    const size_t n = self.grad.size();
    if (a.requires_grad()) {
      for (size_t i = 0; i < n; ++i) {
        a.grad()[i] += self.grad[i] * b.value()[i];
      }
    }
    if (b.requires_grad()) {
      for (size_t i = 0; i < n; ++i) {
        b.grad()[i] += self.grad[i] * a.value()[i];
      }
    }
  });
  kernels::active().mul(a.value().data(), b.value().data(), out.value().data(),
                        a.size());
  return out;
}

Tensor scale(const Tensor& a, double s) {
  check_rank(a.shape(), "scale");
  Tensor out = make_op(a.shape(), {a}, [s](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (a.requires_grad()) {
      kernels::active().axpy(s, self.grad.data(), a.grad().data(),
                             self.grad.size());
    }
  });
  kernels::active().scale(a.value().data(), s, out.value().data(), a.size());
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  const size_t cols = parts[0].cols();
  size_t rows = 0;
  for (const Tensor& p : parts) {
    check_rank(p.shape(), "concat_rows");
    if (p.cols() != cols) shape_mismatch("concat_rows", parts[0].shape(), p.shape());
    rows += p.rows();
  }
  Tensor out = make_op({rows, cols}, parts, [cols](TensorNode& self) {
    size_t off = 0;
    for (Tensor& p : self.inputs) {
      const size_t n = p.node()->value.size();
      if (p.requires_grad()) {
        kernels::active().axpy(1.0, self.grad.data() + off, p.grad().data(),
                               n);
      }
      off += n;
    }
  });
  size_t off = 0;
  for (const Tensor& p : parts) {
    std::copy(p.value().begin(), p.value().end(), out.value().begin() + off);
    off += p.size();
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no parts");
  const size_t rows = parts[0].rows();
  size_t cols = 0;
  for (const Tensor& p : parts) {
    check_rank(p.shape(), "concat_cols");
    if (p.rows() != rows) shape_mismatch("concat_cols", parts[0].shape(), p.shape());
    cols += p.cols();
  }
  Tensor out = make_op({rows, cols}, parts, [rows, cols](TensorNode& self) {
    size_t col_off = 0;
    for (Tensor& p : self.inputs) {
      const size_t pc = p.node()->shape.size() == 2 ? p.node()->shape[1]
                                                    : p.node()->shape[0];
      if (p.requires_grad()) {
        for (size_t r = 0; r < rows; ++r) {
          kernels::active().axpy(1.0, self.grad.data() + r * cols + col_off,
                                 p.grad().data() + r * pc, pc);
        }
      }
      col_off += pc;
    }
  });
  size_t col_off = 0;
  for (const Tensor& p : parts) {
    const size_t pc = p.cols();
    for (size_t r = 0; r < rows; ++r) {
      std::copy(p.value().begin() + r * pc, p.value().begin() + (r + 1) * pc,
                out.value().begin() + r * cols + col_off);
    }
    col_off += pc;
  }
  return out;
}

Tensor slice_rows(const Tensor& a, size_t begin, size_t end) {
  check_rank(a.shape(), "slice_rows");
  if (begin >= end || end > a.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") of " + shape_str(a.shape()));
  }
  const size_t cols = a.cols();
  Tensor out = make_op({end - begin, cols}, {a},
                       [begin, cols](TensorNode& self) {
                         Tensor& a = self.inputs[0];
                         if (a.requires_grad()) {
                           kernels::active().axpy(
                               1.0, self.grad.data(),
                               a.grad().data() + begin * cols,
                               self.grad.size());
                         }
                       });
  std::copy(a.value().begin() + begin * cols, a.value().begin() + end * cols,
            out.value().begin());
  return out;
}

Tensor slice_cols(const Tensor& a, size_t begin, size_t end) {
  check_rank(a.shape(), "slice_cols");
  if (begin >= end || end > a.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") of " + shape_str(a.shape()));
  }
  const size_t rows = a.rows(), cols = a.cols(), width = end - begin;
  Tensor out = make_op({rows, width}, {a},
                       [begin, rows, cols, width](TensorNode& self) {
                         Tensor& a = self.inputs[0];
                         if (a.requires_grad()) {
                           for (size_t r = 0; r < rows; ++r) {
                             kernels::active().axpy(
                                 1.0, self.grad.data() + r * width,
                                 a.grad().data() + r * cols + begin, width);
                           }
                         }
                       });
  for (size_t r = 0; r < rows; ++r) {
    std::copy(a.value().begin() + r * cols + begin,
              a.value().begin() + r * cols + end,
              out.value().begin() + r * width);
  }
  return out;
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
  check_rank(table.shape(), "embedding_lookup");
  if (table.shape().size() != 2) {
    throw ShapeError("embedding_lookup: table must be rank 2, got " +
                     shape_str(table.shape()));
  }
  if (ids.empty()) throw ContractError("embedding_lookup: empty id list");
  const size_t v = table.rows(), d = table.cols();
  for (int id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= v) {
      throw ContractError("embedding_lookup: id " + std::to_string(id) +
                          " out of range [0, " + std::to_string(v) + ")");
    }
  }
  Tensor out = make_op({ids.size(), d}, {table}, [ids, d](TensorNode& self) {
    Tensor& table = self.inputs[0];
    if (table.requires_grad()) {
      for (size_t t = 0; t < ids.size(); ++t) {
        kernels::active().axpy(1.0, self.grad.data() + t * d,
                               table.grad().data() + ids[t] * d, d);
      }
    }
  });
  for (size_t t = 0; t < ids.size(); ++t) {
    std::copy(table.value().begin() + ids[t] * d,
              table.value().begin() + (ids[t] + 1) * d,
              out.value().begin() + t * d);
  }
  return out;
}

Tensor relu(const Tensor& a) {
  check_rank(a.shape(), "relu");
  Tensor out = make_op(a.shape(), {a}, [](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (a.requires_grad()) {
      kernels::active().relu_backward(a.value().data(), self.grad.data(),
                                      a.grad().data(), self.grad.size());
    }
  });
  kernels::active().relu(a.value().data(), out.value().data(), a.size());
  return out;
}

Tensor exp(const Tensor& a) {
  check_rank(a.shape(), "exp");
  Tensor out = make_op(a.shape(), {a}, [](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (a.requires_grad()) {
      for (size_t i = 0; i < self.grad.size(); ++i) {
        a.grad()[i] += self.grad[i] * self.value[i];
      }
    }
  });
  for (size_t i = 0; i < a.size(); ++i) {
    out.value()[i] = std::exp(a.value()[i]);
  }
  return out;
}

Tensor log(const Tensor& a) {
  check_rank(a.shape(), "log");
  Tensor out = make_op(a.shape(), {a}, [](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (a.requires_grad()) {
      for (size_t i = 0; i < self.grad.size(); ++i) {
        a.grad()[i] += self.grad[i] / a.value()[i];
      }
    }
  });
  for (size_t i = 0; i < a.size(); ++i) {
    out.value()[i] = std::log(a.value()[i]);
  }
  return out;
}

Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps) {
  check_rank(x.shape(), "layernorm");
  const size_t rows = x.rows(), cols = x.cols();
  if (gain.size() != cols || bias.size() != cols) {
    shape_mismatch("layernorm", x.shape(), gain.shape());
  }
  Tensor out = make_op(
      x.shape(), {x, gain, bias}, [rows, cols, eps](TensorNode& self) {
        Tensor& x = self.inputs[0];
        Tensor& gain = self.inputs[1];
        Tensor& bias = self.inputs[2];
        std::vector<double> xhat(cols);
        for (size_t r = 0; r < rows; ++r) {
          const double* xr = x.value().data() + r * cols;
          const double* gr = self.grad.data() + r * cols;
          double mu = 0.0;
          for (size_t j = 0; j < cols; ++j) mu += xr[j];
          mu /= static_cast<double>(cols);
          double var = 0.0;
          for (size_t j = 0; j < cols; ++j) {
            var += (xr[j] - mu) * (xr[j] - mu);
          }
          var /= static_cast<double>(cols);
          const double inv = 1.0 / std::sqrt(var + eps);
          for (size_t j = 0; j < cols; ++j) xhat[j] = (xr[j] - mu) * inv;

          if (bias.requires_grad()) {
            for (size_t j = 0; j < cols; ++j) bias.grad()[j] += gr[j];
          }
          if (gain.requires_grad()) {
            for (size_t j = 0; j < cols; ++j) {
              gain.grad()[j] += gr[j] * xhat[j];
            }
          }
          if (x.requires_grad()) {
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (size_t j = 0; j < cols; ++j) {
              const double dxhat = gr[j] * gain.value()[j];
              mean_dxhat += dxhat;
              mean_dxhat_xhat += dxhat * xhat[j];
            }
            mean_dxhat /= static_cast<double>(cols);
            mean_dxhat_xhat /= static_cast<double>(cols);
            for (size_t j = 0; j < cols; ++j) {
              const double dxhat = gr[j] * gain.value()[j];
              x.grad()[j + r * cols] +=
                  inv * (dxhat - mean_dxhat - xhat[j] * mean_dxhat_xhat);
            }
          }
        }
      });
  for (size_t r = 0; r < rows; ++r) {
    const double* xr = x.value().data() + r * cols;
    double* yr = out.value().data() + r * cols;
    double mu = 0.0;
    for (size_t j = 0; j < cols; ++j) mu += xr[j];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (size_t j = 0; j < cols; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (size_t j = 0; j < cols; ++j) {
      yr[j] = (xr[j] - mu) * inv * gain.value()[j] + bias.value()[j];
    }
  }
  return out;
}

Tensor softmax(const Tensor& a, int axis) {
  check_rank(a.shape(), "softmax");
  if (axis != -1 && axis != 0 && axis != 1) {
    throw ContractError("softmax: axis must be 0, 1 or -1");
  }
  if (axis == 0 && a.shape().size() == 2) {
    return transpose(softmax(transpose(a), -1));
  }
  const size_t rows = a.rows(), cols = a.cols();
  Tensor out = make_op(a.shape(), {a}, [rows, cols](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (!a.requires_grad()) return;
    for (size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* gy = self.grad.data() + r * cols;
      double dot = 0.0;
      for (size_t j = 0; j < cols; ++j) dot += y[j] * gy[j];
      for (size_t j = 0; j < cols; ++j) {
        a.grad()[r * cols + j] += y[j] * (gy[j] - dot);
      }
    }
  });
  for (size_t r = 0; r < rows; ++r) {
    const double* xr = a.value().data() + r * cols;
    double* yr = out.value().data() + r * cols;
    double mx = xr[0];
    for (size_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
    double sum = 0.0;
    for (size_t j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    for (size_t j = 0; j < cols; ++j) yr[j] /= sum;
  }
  return out;
}

Tensor log_softmax_rows(const Tensor& a) {
  check_rank(a.shape(), "log_softmax_rows");
  const size_t rows = a.rows(), cols = a.cols();
  Tensor out = make_op(a.shape(), {a}, [rows, cols](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (!a.requires_grad()) return;
    for (size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* gy = self.grad.data() + r * cols;
      double gsum = 0.0;
      for (size_t j = 0; j < cols; ++j) gsum += gy[j];
      for (size_t j = 0; j < cols; ++j) {
        a.grad()[r * cols + j] += gy[j] - std::exp(y[j]) * gsum;
      }
    }
  });
  for (size_t r = 0; r < rows; ++r) {
    const double* xr = a.value().data() + r * cols;
    double* yr = out.value().data() + r * cols;
    double mx = xr[0];
    for (size_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
    double sum = 0.0;
    for (size_t j = 0; j < cols; ++j) sum += std::exp(xr[j] - mx);
    const double lse = mx + std::log(sum);
    for (size_t j = 0; j < cols; ++j) yr[j] = xr[j] - lse;
  }
  return out;
}

Tensor row_logsumexp(const Tensor& a) {
  check_rank(a.shape(), "row_logsumexp");
  const size_t rows = a.rows(), cols = a.cols();
  Tensor out = make_op({rows}, {a}, [rows, cols](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (!a.requires_grad()) return;
    for (size_t r = 0; r < rows; ++r) {
      const double lse = self.value[r];
      const double g = self.grad[r];
      for (size_t j = 0; j < cols; ++j) {
        a.grad()[r * cols + j] += g * std::exp(a.value()[r * cols + j] - lse);
      }
    }
  });
  for (size_t r = 0; r < rows; ++r) {
    const double* xr = a.value().data() + r * cols;
    double mx = xr[0];
    for (size_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
    double sum = 0.0;
    for (size_t j = 0; j < cols; ++j) sum += std::exp(xr[j] - mx);
    out.value()[r] = mx + std::log(sum);
  }
  return out;
}

Tensor row_l2_normalize(const Tensor& a, double eps) {
  check_rank(a.shape(), "row_l2_normalize");
  const size_t rows = a.rows(), cols = a.cols();
  Tensor out = make_op(a.shape(), {a}, [rows, cols, eps](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (!a.requires_grad()) return;
    for (size_t r = 0; r < rows; ++r) {
      const double* xr = a.value().data() + r * cols;
      const double* yr = self.value.data() + r * cols;
      const double* gy = self.grad.data() + r * cols;
      double sq = 0.0;
      for (size_t j = 0; j < cols; ++j) sq += xr[j] * xr[j];
      const double norm = std::sqrt(sq);
      if (norm > eps) {
        double dot = 0.0;
        for (size_t j = 0; j < cols; ++j) dot += yr[j] * gy[j];
        for (size_t j = 0; j < cols; ++j) {
          a.grad()[r * cols + j] += (gy[j] - yr[j] * dot) / norm;
        }
      } else {
        for (size_t j = 0; j < cols; ++j) {
          a.grad()[r * cols + j] += gy[j] / eps;
        }
      }
    }
  });
  for (size_t r = 0; r < rows; ++r) {
    const double* xr = a.value().data() + r * cols;
    double* yr = out.value().data() + r * cols;
    double sq = 0.0;
    for (size_t j = 0; j < cols; ++j) sq += xr[j] * xr[j];
    const double denom = std::max(std::sqrt(sq), eps);
    for (size_t j = 0; j < cols; ++j) yr[j] = xr[j] / denom;
  }
  return out;
}

Tensor take_per_row(const Tensor& a, const std::vector<size_t>& cols_idx) {
  check_rank(a.shape(), "take_per_row");
  const size_t rows = a.rows(), cols = a.cols();
  if (cols_idx.size() != rows) {
    throw ShapeError("take_per_row: " + std::to_string(cols_idx.size()) +
                     " indices for " + shape_str(a.shape()));
  }
  for (size_t c : cols_idx) {
    if (c >= cols) {
      throw ContractError("take_per_row: column " + std::to_string(c) +
                          " out of range");
    }
  }
  Tensor out = make_op({rows}, {a}, [cols_idx, cols](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (!a.requires_grad()) return;
    for (size_t r = 0; r < cols_idx.size(); ++r) {
      a.grad()[r * cols + cols_idx[r]] += self.grad[r];
    }
  });
  for (size_t r = 0; r < rows; ++r) {
    out.value()[r] = a.value()[r * cols + cols_idx[r]];
  }
  return out;
}

Tensor sum(const Tensor& a) {
  check_rank(a.shape(), "sum");
  Tensor out = make_op({1}, {a}, [](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (!a.requires_grad()) return;
    const double g = self.grad[0];
    for (size_t i = 0; i < a.grad().size(); ++i) a.grad()[i] += g;
  });
  double s = 0.0;
  for (double v : a.value()) s += v;
  out.value()[0] = s;
  return out;
}

Tensor mean(const Tensor& a) {
  check_rank(a.shape(), "mean");
  const double inv = 1.0 / static_cast<double>(a.size());
  Tensor out = make_op({1}, {a}, [inv](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (!a.requires_grad()) return;
    const double g = self.grad[0] * inv;
    for (size_t i = 0; i < a.grad().size(); ++i) a.grad()[i] += g;
  });
  double s = 0.0;
  for (double v : a.value()) s += v;
  out.value()[0] = s * inv;
  return out;
}

Tensor transpose(const Tensor& a) {
  check_rank(a.shape(), "transpose");
  const size_t m = a.rows(), n = a.cols();
  Tensor out = make_op({n, m}, {a}, [m, n](TensorNode& self) {
    Tensor& a = self.inputs[0];
    if (!a.requires_grad()) return;
    std::vector<double> gt(m * n);
    kernels::active().transpose(self.grad.data(), gt.data(), n, m);
    kernels::active().axpy(1.0, gt.data(), a.grad().data(), m * n);
  });
  kernels::active().transpose(a.value().data(), out.value().data(), m, n);
  return out;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward: loss must be a defined scalar tensor");
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward: loss does not require grad");
  }

  // Postorder DFS = topological order with inputs before consumers.
  std::vector<Tensor> topo;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<Tensor, bool>> stack;
  stack.emplace_back(loss, false);
  while (!stack.empty()) {
    auto [t, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      topo.push_back(t);
      continue;
    }
    if (!visited.insert(t.node()).second) continue;
    stack.emplace_back(t, true);
    for (const Tensor& in : t.node()->inputs) {
      if (in.requires_grad() && visited.find(in.node()) == visited.end()) {
        stack.emplace_back(in, false);
      }
    }
  }

  loss.node()->grad[0] = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    TensorNode* n = it->node();
    if (n->backprop) n->backprop(*n);
  }
  // Release the tape: drop edges and closures so intermediates can free.
  for (Tensor& t : topo) {
    t.node()->inputs.clear();
    t.node()->backprop = nullptr;
  }
}

}  // namespace contrasum
