#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contrasum/augment.hpp"
#include "contrasum/contrastive.hpp"
#include "contrasum/corpus.hpp"
#include "contrasum/model.hpp"
#include "contrasum/optimizer.hpp"
#include "contrasum/tokenizer.hpp"

namespace contrasum {

struct TrainingConfig {
  double alpha = 0.2;     // weight of the contrastive term in the joint loss
  double tau = 0.5;       // contrastive temperature
  size_t batch_size = 4;  // K source documents per batch (2K views)
  size_t epochs = 5;
  double lr = 1e-3;
  uint64_t seed = 0;
  // A disengaged spec means the view is the unmodified document.
  std::optional<AugmentationSpec> aug1;
  std::optional<AugmentationSpec> aug2;
  size_t freeze_layers = 0;
  // true: generation loss averages the cross-entropy of both augmented views
  // (the default); false: it scores the original document once per example.
  bool gen_loss_from_views = true;

  void validate() const;
};

struct LossRecord {
  size_t epoch = 0;
  size_t batch = 0;
  double total = 0.0;         // alpha * contrastive + (1 - alpha) * generation
  double contrastive = 0.0;
  double generation = 0.0;
};

// total = alpha * l_cl + (1 - alpha) * l_gen; the alpha = 0 / alpha = 1
// boundaries return the surviving term exactly. ContractError outside [0,1].
double joint_loss(double l_cl, double l_gen, double alpha);
Tensor joint_loss_graph(const Tensor& l_cl, const Tensor& l_gen, double alpha);

// Mean over the target's next-token predictions of -log p(tgt[t+1] | ..t);
// logits must have one row per target position. ValidationError when the
// framed target has no next token to predict.
Tensor cross_entropy_next_token(const Tensor& logits, const TokenSequence& tgt);

// One already-encoded training view: framed source and framed target.
struct EncodedView {
  TokenSequence src;
  TokenSequence tgt;
};

// Mean over views of the per-view next-token cross-entropy.
Tensor generation_loss(const ModelParameters& params, const ModelConfig& cfg,
                       const std::vector<EncodedView>& views);

// One pass over the corpus in the epoch's shuffled order. Per batch of K'
// documents: two augmented views each (per-view streams derived from the
// spec seed, the epoch, the source index, and the view slot), one shared
// encode per view feeding both the projected aggregate (contrastive term)
// and teacher forcing (generation term), then backprop, gradient clipping at
// global norm 1, and one Adam step over the trainable parameters. The final
// partial batch trains with its actual size. `opt` must have been created
// from params.trainable() followed by head.trainable().
// A non-finite loss aborts with a ValidationError naming epoch and batch.
std::vector<LossRecord> train_epoch(ModelParameters& params,
                                    ProjectionHead& head,
                                    const ModelConfig& mcfg,
                                    const TrainingConfig& tcfg,
                                    const std::vector<RawExample>& corpus,
                                    const Vocabulary& vocab, AdamState& opt,
                                    size_t epoch);

// Applies freezing, then runs tcfg.epochs epochs with a fresh document
// shuffle per epoch. When checkpoint_dir is non-empty, writes
// <dir>/epoch<N>.ckpt (model + head tensors) after each epoch.
std::vector<LossRecord> train(ModelParameters& params, ProjectionHead& head,
                              const ModelConfig& mcfg,
                              const TrainingConfig& tcfg,
                              const std::vector<RawExample>& corpus,
                              const Vocabulary& vocab,
                              const std::string& checkpoint_dir = "");

// Model plus head tensors in checkpoint order.
NamedTensors training_state(const ModelParameters& params,
                            const ProjectionHead& head);

// CSV with header epoch,batch,L,L_cl,L_gen; floats printed with %.17g so
// identical runs give identical bytes.
void write_loss_csv(const std::string& path,
                    const std::vector<LossRecord>& records);

}  // namespace contrasum
