#pragma once

#include <string>
#include <utility>
#include <vector>

#include "contrasum/corpus.hpp"
#include "contrasum/model.hpp"
#include "contrasum/tokenizer.hpp"

namespace contrasum {

struct RougeTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RougeScore {
  RougeTriple rg1;
  RougeTriple rg2;
  RougeTriple rgl;
};

// Scorer-side tokenization, independent of the model vocabulary: lowercase,
// delete punctuation characters, split on whitespace.
std::vector<std::string> tokenize_for_eval(const std::string& text);

// Clipped n-gram overlap F1, n in {1, 2}. Either side lacking n-grams
// scores all zeros.
RougeTriple rouge_n(const std::string& candidate, const std::string& reference,
                    int n);

// Token-level longest-common-subsequence length; the primitive under
// rouge_l, exposed so it can be verified exhaustively.
size_t lcs_length(const std::vector<std::string>& a,
                  const std::vector<std::string>& b);

// Longest-common-subsequence F1 over eval tokens.
RougeTriple rouge_l(const std::string& candidate,
                    const std::string& reference);

RougeScore rouge_all(const std::string& candidate,
                     const std::string& reference);

// The four example-difficulty measures the robustness slices are built on.
struct SubpopMetrics {
  size_t length = 0;            // source token count
  double abstractiveness = 0.0; // fraction of summary bigrams absent from source
  double distillation = 0.0;    // source tokens / summary tokens
  double position = 0.0;        // mean relative first-match index, 1.0 if none
};

inline constexpr const char* kSubpopMetricNames[4] = {
    "length", "abstractiveness", "distillation", "position"};

// ValidationError when either side has no eval tokens.
SubpopMetrics compute_metrics(const RawExample& ex);

// Indices of the ceil(0.1 N) highest (top) and lowest (bottom) examples by
// the named metric; ties prefer the lower original index. ValidationError
// for corpora under 10 examples or unknown metric names.
std::pair<std::vector<size_t>, std::vector<size_t>> slice_deciles(
    const std::vector<RawExample>& corpus, const std::string& metric);

struct SliceScores {
  std::string metric;
  RougeScore top;
  RougeScore bottom;
  RougeScore gap;  // top minus bottom, fieldwise
};

struct SliceReport {
  std::vector<SliceScores> metrics;  // one entry per kSubpopMetricNames
};

struct EvalResult {
  RougeScore overall;                    // means over the whole corpus
  std::vector<RougeScore> per_example;   // corpus order
  SliceReport slices;                    // empty unless with_slices
};

// Greedy-decodes every document and scores it against its reference
// summary; read-only with respect to the parameters. with_slices adds the
// four-metric top/bottom decile breakdown.
EvalResult evaluate(const ModelParameters& params, const ModelConfig& cfg,
                    const Vocabulary& vocab,
                    const std::vector<RawExample>& corpus, bool with_slices);

// Rows metric,slice,rg1,rg2,rgl (f1 values, %.17g); slices top, bottom, gap.
void write_slice_csv(const std::string& path, const SliceReport& report);

}  // namespace contrasum
