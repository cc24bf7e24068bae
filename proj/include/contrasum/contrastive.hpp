#pragma once

#include <cstdint>
#include <vector>

#include "contrasum/checkpoint.hpp"
#include "contrasum/tensor.hpp"

namespace contrasum {

// 2-layer MLP projecting the aggregate representation into the space where
// the contrastive loss lives: z = w2 . relu(w1 . v + b1) + b2.
struct ProjectionHead {
  Tensor w1, b1;  // d_model -> d_model
  Tensor w2, b2;  // d_model -> d_proj

  // Same init recipe as the model (uniform(-0.08, 0.08) weights, zero
  // biases) on a stream decorrelated from the model's.
  static ProjectionHead init(size_t d_model, size_t d_proj, uint64_t seed);

  NamedTensors named() const;  // head.w1, head.b1, head.w2, head.b2
  std::vector<Tensor> trainable() const;
  void load_values(const NamedTensors& entries);
};

// v: (1 x d_model) -> z: (1 x d_proj); differentiable.
Tensor project(const ProjectionHead& head, const Tensor& v);

// Plain cosine with both norms clamped below by 1e-12 so zero vectors yield
// 0 instead of NaN.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

// A batch of 2K projected views; rows 2i and 2i+1 are the positive pair from
// source document i.
struct ViewBatch {
  std::vector<std::vector<double>> z;
  size_t pairs() const { return z.size() / 2; }  // K
  void validate() const;  // even row count >= 2, equal dimensions
};

// One pairwise term: -log[ exp(sim(z_i,z_j)/tau) / sum_{k != i}
// exp(sim(z_i,z_k)/tau) ], max-stabilized. Row indices are 0-based.
double ntxent_pair(size_t i, size_t j, const ViewBatch& batch, double tau);

// Batch loss: (1/2K) sum_i [ l(2i, 2i+1) + l(2i+1, 2i) ].
double contrastive_loss(const ViewBatch& batch, double tau);

// Differentiable version over a (2K x d_proj) tensor with the same pairing
// convention; equals the plain version on the same values.
Tensor contrastive_loss_graph(const Tensor& z, double tau);

}  // namespace contrasum
