#include "contrasum/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contrasum/errors.hpp"
#include "contrasum/rng.hpp"

namespace contrasum {

namespace {

constexpr double kNormGuard = 1e-12;

Tensor uniform_matrix(size_t r, size_t c, Rng& rng) {
  Tensor t = Tensor::zeros({r, c}, /*requires_grad=*/true);
  for (double& v : t.value()) v = rng.next_double(-0.08, 0.08);
  return t;
}

}  // namespace

ProjectionHead ProjectionHead::init(size_t d_model, size_t d_proj,
                                    uint64_t seed) {
  if (d_model < 1) throw ValidationError("projection head: d_model must be >= 1");
  if (d_proj < 2) throw ValidationError("projection head: d_proj must be >= 2");
  Rng rng(derive_seed(seed, stream_tag::kParamInit, 1));
  ProjectionHead h;
  h.w1 = uniform_matrix(d_model, d_model, rng);
  h.b1 = Tensor::zeros({d_model}, true);
  h.w2 = uniform_matrix(d_model, d_proj, rng);
  h.b2 = Tensor::zeros({d_proj}, true);
  return h;
}

NamedTensors ProjectionHead::named() const {
  return {{"head.w1", w1}, {"head.b1", b1}, {"head.w2", w2}, {"head.b2", b2}};
}

std::vector<Tensor> ProjectionHead::trainable() const {
  std::vector<Tensor> out;
  for (const auto& [name, t] : named()) {
    if (t.requires_grad()) out.push_back(t);
  }
  return out;
}

void ProjectionHead::load_values(const NamedTensors& entries) {
  copy_checkpoint_values(entries, named());
}

Tensor project(const ProjectionHead& head, const Tensor& v) {
  Tensor hidden = relu(add(matmul(v, head.w1), head.b1));
  return add(matmul(hidden, head.w2), head.b2);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw ShapeError("cosine: vectors of length " + std::to_string(a.size()) +
                     " and " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::max(std::sqrt(na), kNormGuard) *
                std::max(std::sqrt(nb), kNormGuard));
}

void ViewBatch::validate() const {
  if (z.size() < 2 || z.size() % 2 != 0) {
    throw ContractError("view batch: need an even row count >= 2, got " +
                        std::to_string(z.size()));
  }
  for (const auto& row : z) {
    if (row.size() != z[0].size() || row.empty()) {
      throw ContractError("view batch: ragged or empty rows");
    }
  }
}

double ntxent_pair(size_t i, size_t j, const ViewBatch& batch, double tau) {
  batch.validate();
  if (tau <= 0.0) throw ContractError("ntxent: tau must be positive");
  if (i >= batch.z.size() || j >= batch.z.size() || i == j) {
    throw ContractError("ntxent: bad row indices " + std::to_string(i) +
                        ", " + std::to_string(j));
  }
  // All similarities from anchor i except the self term k = i.
  std::vector<double> sims;
  sims.reserve(batch.z.size() - 1);
  double pos = 0.0;
  for (size_t k = 0; k < batch.z.size(); ++k) {
    if (k == i) continue;
    const double s = cosine(batch.z[i], batch.z[k]) / tau;
    sims.push_back(s);
    if (k == j) pos = s;
  }
  double mx = sims[0];
  for (double s : sims) mx = std::max(mx, s);
  double sum = 0.0;
  for (double s : sims) sum += std::exp(s - mx);
  return mx + std::log(sum) - pos;
}

double contrastive_loss(const ViewBatch& batch, double tau) {
  batch.validate();
  const size_t k = batch.pairs();
  double total = 0.0;
  for (size_t i = 0; i < k; ++i) {
    total += ntxent_pair(2 * i, 2 * i + 1, batch, tau);
    total += ntxent_pair(2 * i + 1, 2 * i, batch, tau);
  }
  return total / static_cast<double>(2 * k);
}

Tensor contrastive_loss_graph(const Tensor& z, double tau) {
  if (tau <= 0.0) throw ContractError("ntxent: tau must be positive");
  const size_t rows = z.rows();
  if (z.shape().size() != 2 || rows < 2 || rows % 2 != 0) {
    throw ContractError("contrastive_loss_graph: need an even row count >= 2 "
                        "of projected views, got " + shape_str(z.shape()));
  }
  Tensor zn = row_l2_normalize(z, kNormGuard);
  Tensor sims = scale(matmul(zn, transpose(zn)), 1.0 / tau);
  // Drop the k = i self term from every row's denominator: -1e9 underflows
  // to an exact 0 after the max-subtracted exp.
  Tensor diag_mask = Tensor::zeros({rows, rows});
  for (size_t r = 0; r < rows; ++r) diag_mask.value()[r * rows + r] = -1e9;
  Tensor masked = add(sims, diag_mask);
  std::vector<size_t> partner(rows);
  for (size_t r = 0; r < rows; ++r) partner[r] = r ^ 1;  // 0<->1, 2<->3, ...
  Tensor per_row = sub(row_logsumexp(masked), take_per_row(masked, partner));
  return mean(per_row);
}

}  // namespace contrasum
