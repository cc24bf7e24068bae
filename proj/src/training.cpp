#include "contrasum/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "contrasum/errors.hpp"
#include "contrasum/rng.hpp"

namespace contrasum {

void TrainingConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("training: alpha must be in [0, 1]");
  }
  if (!(tau > 0.0)) throw ValidationError("training: tau must be positive");
  if (batch_size < 1) throw ValidationError("training: batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("training: epochs must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("training: lr must be positive");
  if (aug1 && aug1->n < 1) throw ValidationError("training: aug1 n must be >= 1");
  if (aug2 && aug2->n < 1) throw ValidationError("training: aug2 n must be >= 1");
}

double joint_loss(double l_cl, double l_gen, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractError("joint_loss: alpha must be in [0, 1]");
  }
  if (alpha == 0.0) return l_gen;
  if (alpha == 1.0) return l_cl;
  return alpha * l_cl + (1.0 - alpha) * l_gen;
}

Tensor joint_loss_graph(const Tensor& l_cl, const Tensor& l_gen,
                        double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractError("joint_loss: alpha must be in [0, 1]");
  }
  if (alpha == 0.0) return l_gen;
  if (alpha == 1.0) return l_cl;
  return add(scale(l_cl, alpha), scale(l_gen, 1.0 - alpha));
}

Tensor cross_entropy_next_token(const Tensor& logits,
                                const TokenSequence& tgt) {
  if (tgt.size() < 2) {
    throw ValidationError("cross entropy: target has no next token");
  }
  if (logits.rows() != tgt.size()) {
    throw ShapeError("cross entropy: " + std::to_string(logits.rows()) +
                     " logit rows for target length " +
                     std::to_string(tgt.size()));
  }
  const size_t steps = tgt.size() - 1;
  std::vector<size_t> next(steps);
  for (size_t t = 0; t < steps; ++t) next[t] = static_cast<size_t>(tgt[t + 1]);
  Tensor lp = log_softmax_rows(slice_rows(logits, 0, steps));
  return scale(mean(take_per_row(lp, next)), -1.0);
}

Tensor generation_loss(const ModelParameters& params, const ModelConfig& cfg,
                       const std::vector<EncodedView>& views) {
  if (views.empty()) throw ValidationError("generation_loss: no views");
  std::vector<Tensor> losses;
  losses.reserve(views.size());
  for (const EncodedView& v : views) {
    EncoderOutput ctx = encode(params, cfg, v.src);
    losses.push_back(
        cross_entropy_next_token(teacher_forced_logits(params, cfg, ctx, v.tgt),
                                 v.tgt));
  }
  return losses.size() == 1 ? losses[0] : mean(concat_rows(losses));
}

namespace {

SentenceDocument make_view(const std::optional<AugmentationSpec>& spec,
                           const SentenceDocument& doc, size_t idx, int view) {
  if (!spec) return doc;
  AugmentationSpec s = *spec;
  s.seed = derive_seed(spec->seed, idx, static_cast<uint64_t>(view));
  return apply(s, doc);
}

std::vector<Tensor> trainables(const ModelParameters& params,
                               const ProjectionHead& head) {
  std::vector<Tensor> out = params.trainable();
  for (const Tensor& t : head.trainable()) out.push_back(t);
  return out;
}

}  // namespace

std::vector<LossRecord> train_epoch(ModelParameters& params,
                                    ProjectionHead& head,
                                    const ModelConfig& mcfg,
                                    const TrainingConfig& tcfg,
                                    const std::vector<RawExample>& corpus,
                                    const Vocabulary& vocab, AdamState& opt,
                                    size_t epoch) {
  tcfg.validate();
  mcfg.validate();
  if (corpus.empty()) throw ValidationError("train: empty corpus");

  // Fresh document order and fresh augmentation draws every epoch.
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(derive_seed(tcfg.seed, stream_tag::kShuffle, epoch));
  for (size_t i = order.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(shuffle_rng.next_below(i));
    std::swap(order[i - 1], order[j]);
  }
  auto epoch_spec = [&](const std::optional<AugmentationSpec>& spec)
      -> std::optional<AugmentationSpec> {
    if (!spec) return spec;
    AugmentationSpec s = *spec;
    s.seed = derive_seed(spec->seed, stream_tag::kAugmentEpoch, epoch);
    return s;
  };
  const std::optional<AugmentationSpec> aug1 = epoch_spec(tcfg.aug1);
  const std::optional<AugmentationSpec> aug2 = epoch_spec(tcfg.aug2);

  std::vector<Tensor> train_params = trainables(params, head);
  std::vector<LossRecord> records;
  const size_t k = tcfg.batch_size;
  for (size_t start = 0, batch = 0; start < order.size(); start += k, ++batch) {
    const size_t end = std::min(start + k, order.size());
    std::vector<Tensor> aggregates;
    std::vector<Tensor> view_losses;
    aggregates.reserve(2 * (end - start));
    for (size_t pos = start; pos < end; ++pos) {
      const size_t idx = order[pos];
      const RawExample& ex = corpus[idx];
      const SentenceDocument doc = split_sentences(ex.document);
      const TokenSequence tgt =
          encode(vocab, ex.summary, /*add_frame=*/true, mcfg.max_tgt_len);
      for (int view = 0; view < 2; ++view) {
        const SentenceDocument viewed =
            make_view(view == 0 ? aug1 : aug2, doc, idx, view);
        const TokenSequence src = encode(vocab, join(viewed),
                                         /*add_frame=*/true, mcfg.max_src_len);
        EncoderOutput ctx = encode(params, mcfg, src);
        aggregates.push_back(aggregate(ctx));
        if (tcfg.gen_loss_from_views) {
          view_losses.push_back(cross_entropy_next_token(
              teacher_forced_logits(params, mcfg, ctx, tgt), tgt));
        }
      }
      if (!tcfg.gen_loss_from_views) {
        const TokenSequence src = encode(vocab, ex.document, /*add_frame=*/true,
                                         mcfg.max_src_len);
        EncoderOutput ctx = encode(params, mcfg, src);
        view_losses.push_back(cross_entropy_next_token(
            teacher_forced_logits(params, mcfg, ctx, tgt), tgt));
      }
    }
    Tensor z = project(head, concat_rows(aggregates));
    Tensor l_cl = contrastive_loss_graph(z, tcfg.tau);
    Tensor l_gen = view_losses.size() == 1 ? view_losses[0]
                                           : mean(concat_rows(view_losses));
    Tensor total = joint_loss_graph(l_cl, l_gen, tcfg.alpha);
    if (!std::isfinite(total.item()) || !std::isfinite(l_cl.item()) ||
        !std::isfinite(l_gen.item())) {
      throw ValidationError("train: non-finite loss at epoch " +
                            std::to_string(epoch) + " batch " +
                            std::to_string(batch));
    }
    for (Tensor& p : train_params) p.zero_grad();
    backward(total);
    clip_grad_norm(train_params, 1.0);
    adam_step(train_params, opt);
    records.push_back(LossRecord{epoch, batch, total.item(), l_cl.item(),
                                 l_gen.item()});
  }
  return records;
}

std::vector<LossRecord> train(ModelParameters& params, ProjectionHead& head,
                              const ModelConfig& mcfg,
                              const TrainingConfig& tcfg,
                              const std::vector<RawExample>& corpus,
                              const Vocabulary& vocab,
                              const std::string& checkpoint_dir) {
  tcfg.validate();
  set_frozen(params, tcfg.freeze_layers);
  std::vector<Tensor> train_params = trainables(params, head);
  AdamState opt = make_adam_state(train_params, tcfg.lr);
  std::vector<LossRecord> history;
  for (size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
    std::vector<LossRecord> recs =
        train_epoch(params, head, mcfg, tcfg, corpus, vocab, opt, epoch);
    history.insert(history.end(), recs.begin(), recs.end());
    if (!checkpoint_dir.empty()) {
      save_checkpoint(checkpoint_dir + "/epoch" + std::to_string(epoch + 1) +
                          ".ckpt",
                      training_state(params, head));
    }
  }
  return history;
}

NamedTensors training_state(const ModelParameters& params,
                            const ProjectionHead& head) {
  NamedTensors out = params.named();
  for (auto& entry : head.named()) out.push_back(entry);
  return out;
}

void write_loss_csv(const std::string& path,
                    const std::vector<LossRecord>& records) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "epoch,batch,L,L_cl,L_gen\n";
  char buf[96];
  for (const LossRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g\n", r.epoch,
                  r.batch, r.total, r.contrastive, r.generation);
    os << buf;
  }
  os.flush();
  if (!os) throw IoError("write failed for " + path);
}

}  // namespace contrasum
