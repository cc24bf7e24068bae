#pragma once

#include <cstddef>
#include <vector>

#include "contrasum/tensor.hpp"

namespace contrasum {

// Adam with bias correction over an explicit parameter list. Frozen tensors
// are excluded by simply not listing them; the state owns one first/second
// moment buffer per listed parameter, in list order.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  size_t t = 0;  // completed steps
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

AdamState make_adam_state(const std::vector<Tensor>& params, double lr = 1e-3);

// One Adam update over all params; gradients are zeroed afterwards.
// Throws ContractError if any param lacks a gradient buffer.
void adam_step(std::vector<Tensor>& params, AdamState& state);

// Scales all gradients by max_norm/global_norm when the global L2 norm of the
// concatenated gradients exceeds max_norm. Returns the pre-clip norm.
double clip_grad_norm(std::vector<Tensor>& params, double max_norm);

}  // namespace contrasum
