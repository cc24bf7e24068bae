#include "contrasum/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contrasum/errors.hpp"
#include "contrasum/rng.hpp"

namespace contrasum {

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  if (vocab_size < 4) fail("model: vocab_size must cover the 4 reserved ids");
  if (enc_layers < 1) fail("model: enc_layers must be >= 1");
  if (dec_layers < 1) fail("model: dec_layers must be >= 1");
  if (heads < 1) fail("model: heads must be >= 1");
  if (d_model < 1 || d_ff < 1) fail("model: d_model and d_ff must be >= 1");
  if (d_model % heads != 0) {
    fail("model: d_model " + std::to_string(d_model) +
         " not divisible by heads " + std::to_string(heads));
  }
  if (max_src_len < 1 || max_tgt_len < 1) {
    fail("model: sequence length caps must be >= 1");
  }
  if (freeze_layers > enc_layers) {
    fail("model: freeze_layers " + std::to_string(freeze_layers) +
         " exceeds enc_layers " + std::to_string(enc_layers));
  }
}

namespace {

Tensor uniform_matrix(size_t r, size_t c, Rng& rng) {
  Tensor t = Tensor::zeros({r, c}, /*requires_grad=*/true);
  for (double& v : t.value()) v = rng.next_double(-0.08, 0.08);
  return t;
}

Tensor zero_vector(size_t n) { return Tensor::zeros({n}, true); }

Tensor one_vector(size_t n) {
  Tensor t = Tensor::zeros({n}, true);
  std::fill(t.value().begin(), t.value().end(), 1.0);
  return t;
}

LayerNormParams init_ln(size_t d) { return {one_vector(d), zero_vector(d)}; }

AttentionParams init_attn(size_t d, Rng& rng) {
  AttentionParams p;
  p.wq = uniform_matrix(d, d, rng);
  p.bq = zero_vector(d);
  p.wk = uniform_matrix(d, d, rng);
  p.bk = zero_vector(d);
  p.wv = uniform_matrix(d, d, rng);
  p.bv = zero_vector(d);
  p.wo = uniform_matrix(d, d, rng);
  p.bo = zero_vector(d);
  return p;
}

FfnParams init_ffn(size_t d, size_t d_ff, Rng& rng) {
  FfnParams p;
  p.w1 = uniform_matrix(d, d_ff, rng);
  p.b1 = zero_vector(d_ff);
  p.w2 = uniform_matrix(d_ff, d, rng);
  p.b2 = zero_vector(d);
  return p;
}

void push_ln(NamedTensors& out, const std::string& prefix,
             const LayerNormParams& p) {
  out.emplace_back(prefix + ".gain", p.gain);
  out.emplace_back(prefix + ".bias", p.bias);
}

void push_attn(NamedTensors& out, const std::string& prefix,
               const AttentionParams& p) {
  out.emplace_back(prefix + ".wq", p.wq);
  out.emplace_back(prefix + ".bq", p.bq);
  out.emplace_back(prefix + ".wk", p.wk);
  out.emplace_back(prefix + ".bk", p.bk);
  out.emplace_back(prefix + ".wv", p.wv);
  out.emplace_back(prefix + ".bv", p.bv);
  out.emplace_back(prefix + ".wo", p.wo);
  out.emplace_back(prefix + ".bo", p.bo);
}

void push_ffn(NamedTensors& out, const std::string& prefix,
              const FfnParams& p) {
  out.emplace_back(prefix + ".w1", p.w1);
  out.emplace_back(prefix + ".b1", p.b1);
  out.emplace_back(prefix + ".w2", p.w2);
  out.emplace_back(prefix + ".b2", p.b2);
}

void set_group(std::initializer_list<Tensor> ts, bool trainable) {
  for (Tensor t : ts) t.set_requires_grad(trainable);
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add(matmul(x, w), b);
}

// One multi-head attention application. key_mask marks attendable key
// positions; causal additionally hides keys right of the query position.
Tensor attention(const AttentionParams& p, const Tensor& q_in,
                 const Tensor& kv_in, const std::vector<uint8_t>& key_mask,
                 bool causal, size_t heads) {
  const size_t d_model = q_in.cols();
  const size_t dh = d_model / heads;
  Tensor q = affine(q_in, p.wq, p.bq);
  Tensor k = affine(kv_in, p.wk, p.bk);
  Tensor v = affine(kv_in, p.wv, p.bv);
  const size_t qlen = q.rows(), klen = k.rows();
  if (key_mask.size() != klen) {
    throw ContractError("attention: mask length " +
                        std::to_string(key_mask.size()) + " != key count " +
                        std::to_string(klen));
  }
  // Additive mask: 0 keeps a key, -1e9 pushes its softmax weight to exact 0.
  Tensor mask_add = Tensor::zeros({qlen, klen});
  for (size_t r = 0; r < qlen; ++r) {
    for (size_t c = 0; c < klen; ++c) {
      if (!key_mask[c] || (causal && c > r)) {
        mask_add.value()[r * klen + c] = -1e9;
      }
    }
  }
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> per_head;
  per_head.reserve(heads);
  for (size_t h = 0; h < heads; ++h) {
    Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
    Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
    Tensor vh = slice_cols(v, h * dh, (h + 1) * dh);
    Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt_dh);
    Tensor weights = softmax(add(scores, mask_add));
    per_head.push_back(matmul(weights, vh));
  }
  Tensor cat = heads == 1 ? per_head[0] : concat_cols(per_head);
  return affine(cat, p.wo, p.bo);
}

Tensor ffn(const FfnParams& p, const Tensor& x) {
  return affine(relu(affine(x, p.w1, p.b1)), p.w2, p.b2);
}

std::vector<uint8_t> pad_mask(const TokenSequence& ids) {
  std::vector<uint8_t> mask(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) mask[i] = ids[i] != kPadId ? 1 : 0;
  return mask;
}

}  // namespace

ModelParameters ModelParameters::init(const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, stream_tag::kParamInit, 0));
  ModelParameters p;
  p.emb = uniform_matrix(cfg.vocab_size, cfg.d_model, rng);
  p.enc_pos = uniform_matrix(cfg.max_src_len, cfg.d_model, rng);
  for (size_t i = 0; i < cfg.enc_layers; ++i) {
    EncoderLayerParams lp;
    lp.ln1 = init_ln(cfg.d_model);
    lp.attn = init_attn(cfg.d_model, rng);
    lp.ln2 = init_ln(cfg.d_model);
    lp.ffn = init_ffn(cfg.d_model, cfg.d_ff, rng);
    p.enc.push_back(std::move(lp));
  }
  p.enc_final_ln = init_ln(cfg.d_model);
  p.dec_pos = uniform_matrix(cfg.max_tgt_len, cfg.d_model, rng);
  for (size_t i = 0; i < cfg.dec_layers; ++i) {
    DecoderLayerParams lp;
    lp.ln1 = init_ln(cfg.d_model);
    lp.self_attn = init_attn(cfg.d_model, rng);
    lp.ln2 = init_ln(cfg.d_model);
    lp.cross_attn = init_attn(cfg.d_model, rng);
    lp.ln3 = init_ln(cfg.d_model);
    lp.ffn = init_ffn(cfg.d_model, cfg.d_ff, rng);
    p.dec.push_back(std::move(lp));
  }
  p.dec_final_ln = init_ln(cfg.d_model);
  set_frozen(p, cfg.freeze_layers);
  return p;
}

NamedTensors ModelParameters::named() const {
  NamedTensors out;
  out.emplace_back("emb", emb);
  out.emplace_back("enc.pos", enc_pos);
  for (size_t i = 0; i < enc.size(); ++i) {
    const std::string base = "enc.layer" + std::to_string(i);
    push_ln(out, base + ".ln1", enc[i].ln1);
    push_attn(out, base + ".attn", enc[i].attn);
    push_ln(out, base + ".ln2", enc[i].ln2);
    push_ffn(out, base + ".ffn", enc[i].ffn);
  }
  push_ln(out, "enc.final_ln", enc_final_ln);
  out.emplace_back("dec.pos", dec_pos);
  for (size_t i = 0; i < dec.size(); ++i) {
    const std::string base = "dec.layer" + std::to_string(i);
    push_ln(out, base + ".ln1", dec[i].ln1);
    push_attn(out, base + ".self_attn", dec[i].self_attn);
    push_ln(out, base + ".ln2", dec[i].ln2);
    push_attn(out, base + ".cross_attn", dec[i].cross_attn);
    push_ln(out, base + ".ln3", dec[i].ln3);
    push_ffn(out, base + ".ffn", dec[i].ffn);
  }
  push_ln(out, "dec.final_ln", dec_final_ln);
  return out;
}

std::vector<Tensor> ModelParameters::all() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named()) out.push_back(t);
  return out;
}

std::vector<Tensor> ModelParameters::trainable() const {
  std::vector<Tensor> out;
  for (Tensor& t : all()) {
    if (t.requires_grad()) out.push_back(t);
  }
  return out;
}

void ModelParameters::load_values(const NamedTensors& entries) {
  copy_checkpoint_values(entries, named());
}

void set_frozen(ModelParameters& params, size_t l) {
  if (l > params.enc.size()) {
    throw ContractError("set_frozen: l " + std::to_string(l) +
                        " exceeds enc_layers " +
                        std::to_string(params.enc.size()));
  }
  const bool freeze_emb = l > 0;
  set_group({params.emb, params.enc_pos}, !freeze_emb);
  for (size_t i = 0; i < params.enc.size(); ++i) {
    const bool trainable = i >= l;
    const EncoderLayerParams& lp = params.enc[i];
    set_group({lp.ln1.gain, lp.ln1.bias, lp.attn.wq, lp.attn.bq, lp.attn.wk,
               lp.attn.bk, lp.attn.wv, lp.attn.bv, lp.attn.wo, lp.attn.bo,
               lp.ln2.gain, lp.ln2.bias, lp.ffn.w1, lp.ffn.b1, lp.ffn.w2,
               lp.ffn.b2},
              trainable);
  }
  set_group({params.enc_final_ln.gain, params.enc_final_ln.bias},
            l != params.enc.size());
  set_group({params.dec_pos}, true);
  for (const DecoderLayerParams& lp : params.dec) {
    set_group({lp.ln1.gain, lp.ln1.bias, lp.self_attn.wq, lp.self_attn.bq,
               lp.self_attn.wk, lp.self_attn.bk, lp.self_attn.wv,
               lp.self_attn.bv, lp.self_attn.wo, lp.self_attn.bo, lp.ln2.gain,
               lp.ln2.bias, lp.cross_attn.wq, lp.cross_attn.bq,
               lp.cross_attn.wk, lp.cross_attn.bk, lp.cross_attn.wv,
               lp.cross_attn.bv, lp.cross_attn.wo, lp.cross_attn.bo,
               lp.ln3.gain, lp.ln3.bias, lp.ffn.w1, lp.ffn.b1, lp.ffn.w2,
               lp.ffn.b2},
              true);
  }
  set_group({params.dec_final_ln.gain, params.dec_final_ln.bias}, true);
}

EncoderOutput encode(const ModelParameters& params, const ModelConfig& cfg,
                     const TokenSequence& src) {
  if (src.empty()) throw ContractError("encode: empty source");
  if (src.size() > cfg.max_src_len) {
    throw ContractError("encode: source length " + std::to_string(src.size()) +
                        " exceeds max_src_len " +
                        std::to_string(cfg.max_src_len));
  }
  const std::vector<uint8_t> mask = pad_mask(src);
  Tensor x = add(embedding_lookup(params.emb, src),
                 slice_rows(params.enc_pos, 0, src.size()));
  for (const EncoderLayerParams& lp : params.enc) {
    Tensor y = layernorm(x, lp.ln1.gain, lp.ln1.bias);
    x = add(x, attention(lp.attn, y, y, mask, /*causal=*/false, cfg.heads));
    x = add(x, ffn(lp.ffn, layernorm(x, lp.ln2.gain, lp.ln2.bias)));
  }
  Tensor h = layernorm(x, params.enc_final_ln.gain, params.enc_final_ln.bias);
  return EncoderOutput{h, mask};
}

Tensor aggregate(const EncoderOutput& out) {
  return slice_rows(out.h, 0, 1);
}

Tensor teacher_forced_logits(const ModelParameters& params,
                             const ModelConfig& cfg, const EncoderOutput& ctx,
                             const TokenSequence& tgt) {
  if (tgt.empty() || tgt[0] != kBosId) {
    throw ContractError("teacher_forced_logits: target must start with BOS");
  }
  if (tgt.size() > cfg.max_tgt_len) {
    throw ContractError("teacher_forced_logits: target length " +
                        std::to_string(tgt.size()) + " exceeds max_tgt_len " +
                        std::to_string(cfg.max_tgt_len));
  }
  const std::vector<uint8_t> self_mask(tgt.size(), 1);
  Tensor x = add(embedding_lookup(params.emb, tgt),
                 slice_rows(params.dec_pos, 0, tgt.size()));
  for (const DecoderLayerParams& lp : params.dec) {
    Tensor q1 = layernorm(x, lp.ln1.gain, lp.ln1.bias);
    x = add(x, attention(lp.self_attn, q1, q1, self_mask, /*causal=*/true,
                         cfg.heads));
    Tensor q2 = layernorm(x, lp.ln2.gain, lp.ln2.bias);
    x = add(x, attention(lp.cross_attn, q2, ctx.h, ctx.mask, /*causal=*/false,
                         cfg.heads));
    x = add(x, ffn(lp.ffn, layernorm(x, lp.ln3.gain, lp.ln3.bias)));
  }
  Tensor h = layernorm(x, params.dec_final_ln.gain, params.dec_final_ln.bias);
  return matmul(h, transpose(params.emb));
}

TokenSequence greedy_decode(const ModelParameters& params,
                            const ModelConfig& cfg, const EncoderOutput& ctx,
                            size_t max_len) {
  if (max_len < 1) throw ContractError("greedy_decode: max_len must be >= 1");
  TokenSequence seq{kBosId};
  while (seq.size() < max_len && seq.size() <= cfg.max_tgt_len) {
    Tensor logits = teacher_forced_logits(params, cfg, ctx, seq);
    const size_t v = cfg.vocab_size;
    const double* row = logits.value().data() + (seq.size() - 1) * v;
    int best = 0;
    for (size_t j = 1; j < v; ++j) {
      if (row[j] > row[best]) best = static_cast<int>(j);
    }
    seq.push_back(best);
    if (best == kEosId) break;
  }
  return seq;
}

}  // namespace contrasum
