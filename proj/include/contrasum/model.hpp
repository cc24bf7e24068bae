#pragma once

#include <cstdint>
#include <vector>

#include "contrasum/checkpoint.hpp"
#include "contrasum/tensor.hpp"
#include "contrasum/tokenizer.hpp"

namespace contrasum {

// Transformer seq2seq dimensions. Defaults are the desk-scale configuration;
// the "paper" preset in the config module overrides them.
struct ModelConfig {
  size_t vocab_size = 0;  // set after the vocabulary is built
  size_t enc_layers = 2;
  size_t dec_layers = 2;
  size_t heads = 2;
  size_t d_model = 32;
  size_t d_ff = 64;
  size_t max_src_len = 64;
  size_t max_tgt_len = 32;
  size_t freeze_layers = 0;

  void validate() const;  // ValidationError on violated invariants
};

struct LayerNormParams {
  Tensor gain;
  Tensor bias;
};

struct AttentionParams {
  Tensor wq, bq;
  Tensor wk, bk;
  Tensor wv, bv;
  Tensor wo, bo;
};

struct FfnParams {
  Tensor w1, b1;  // d_model -> d_ff
  Tensor w2, b2;  // d_ff -> d_model
};

// Pre-layernorm blocks: x += attn(ln(x)); x += ffn(ln(x)).
struct EncoderLayerParams {
  LayerNormParams ln1;
  AttentionParams attn;
  LayerNormParams ln2;
  FfnParams ffn;
};

struct DecoderLayerParams {
  LayerNormParams ln1;
  AttentionParams self_attn;
  LayerNormParams ln2;
  AttentionParams cross_attn;
  LayerNormParams ln3;
  FfnParams ffn;
};

struct ModelParameters {
  Tensor emb;      // (V x d_model); also the tied output projection
  Tensor enc_pos;  // (max_src_len x d_model), learned
  Tensor dec_pos;  // (max_tgt_len x d_model), learned
  std::vector<EncoderLayerParams> enc;
  LayerNormParams enc_final_ln;
  std::vector<DecoderLayerParams> dec;
  LayerNormParams dec_final_ln;

  // Uniform(-0.08, 0.08) draws for every weight matrix, in named() order,
  // from one stream derived from `seed`; layernorm gains start at 1 and all
  // biases at 0 (no draws consumed).
  static ModelParameters init(const ModelConfig& cfg, uint64_t seed);

  // Canonical (name, tensor) list; the order is the checkpoint layout.
  NamedTensors named() const;
  std::vector<Tensor> all() const;
  std::vector<Tensor> trainable() const;  // requires_grad only

  // Copies checkpoint values into matching names; unknown or missing names
  // and shape mismatches raise ValidationError.
  void load_values(const NamedTensors& entries);
};

// Marks the token embedding, the encoder positional table, and encoder
// layers 0..l-1 as frozen (no gradient, excluded from trainable()); the
// encoder's final layernorm freezes only when l == enc_layers. The decoder
// side, its positional table and the tied output path stay trainable.
// Throws ContractError when l > enc_layers.
void set_frozen(ModelParameters& params, size_t l);

struct EncoderOutput {
  Tensor h;                   // (src_len x d_model)
  std::vector<uint8_t> mask;  // 1 = attendable token, 0 = PAD
};

// Bidirectional self-attention over the framed source; PAD positions are
// masked out of every attention softmax. ContractError on over-length input.
EncoderOutput encode(const ModelParameters& params, const ModelConfig& cfg,
                     const TokenSequence& src);

// Row 0 of h: the representation of the first input token (BOS).
Tensor aggregate(const EncoderOutput& out);

// Causal self-attention over tgt (which must start with BOS) plus
// cross-attention to ctx.h; returns one logit row per target position.
Tensor teacher_forced_logits(const ModelParameters& params,
                             const ModelConfig& cfg, const EncoderOutput& ctx,
                             const TokenSequence& tgt);

// Starts from BOS, repeatedly appends the argmax next token (ties break to
// the smaller id), stops after EOS or when max_len tokens (BOS included)
// have been produced.
TokenSequence greedy_decode(const ModelParameters& params,
                            const ModelConfig& cfg, const EncoderOutput& ctx,
                            size_t max_len);

}  // namespace contrasum
