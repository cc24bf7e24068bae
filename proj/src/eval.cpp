#include "contrasum/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "contrasum/errors.hpp"

namespace contrasum {

size_t lcs_length(const std::vector<std::string>& a,
                  const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  // Two-row dynamic program. Short rows live on the stack: summaries are a
  // handful of tokens and heap churn dominates otherwise.
  constexpr size_t kStackCols = 32;
  size_t stack_prev[kStackCols + 1], stack_cur[kStackCols + 1];
  std::vector<size_t> heap_prev, heap_cur;
  size_t *prev = stack_prev, *cur = stack_cur;
  if (b.size() > kStackCols) {
    heap_prev.assign(b.size() + 1, 0);
    heap_cur.assign(b.size() + 1, 0);
    prev = heap_prev.data();
    cur = heap_cur.data();
  } else {
    std::fill(stack_prev, stack_prev + b.size() + 1, 0);
    std::fill(stack_cur, stack_cur + b.size() + 1, 0);
  }
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::string> tokenize_for_eval(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      flush();
    } else if (!std::ispunct(u)) {
      cur += static_cast<char>(std::tolower(u));
    }
  }
  flush();
  return tokens;
}

namespace {

RougeTriple from_overlap(double overlap, size_t cand_count, size_t ref_count) {
  RougeTriple t;
  if (cand_count == 0 || ref_count == 0) return t;
  t.precision = overlap / static_cast<double>(cand_count);
  t.recall = overlap / static_cast<double>(ref_count);
  if (t.precision + t.recall > 0.0) {
    t.f1 = 2.0 * t.precision * t.recall / (t.precision + t.recall);
  }
  return t;
}

// N-grams keyed by their tokens joined with an unprintable separator.
std::unordered_map<std::string, size_t> ngram_counts(
    const std::vector<std::string>& tokens, size_t n) {
  std::unordered_map<std::string, size_t> counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (size_t j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

RougeScore mean_scores(const std::vector<RougeScore>& scores,
                       const std::vector<size_t>& indices) {
  RougeScore m;
  if (indices.empty()) return m;
  auto acc = [](RougeTriple& into, const RougeTriple& t) {
    into.precision += t.precision;
    into.recall += t.recall;
    into.f1 += t.f1;
  };
  for (size_t i : indices) {
    acc(m.rg1, scores[i].rg1);
    acc(m.rg2, scores[i].rg2);
    acc(m.rgl, scores[i].rgl);
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (RougeTriple* t : {&m.rg1, &m.rg2, &m.rgl}) {
    t->precision *= inv;
    t->recall *= inv;
    t->f1 *= inv;
  }
  return m;
}

double metric_value(const SubpopMetrics& m, const std::string& name) {
  if (name == "length") return static_cast<double>(m.length);
  if (name == "abstractiveness") return m.abstractiveness;
  if (name == "distillation") return m.distillation;
  if (name == "position") return m.position;
  throw ValidationError("unknown subpopulation metric '" + name + "'");
}

}  // namespace

RougeTriple rouge_n(const std::string& candidate, const std::string& reference,
                    int n) {
  if (n != 1 && n != 2) {
    throw ContractError("rouge_n: n must be 1 or 2, got " + std::to_string(n));
  }
  const auto cand = tokenize_for_eval(candidate);
  const auto ref = tokenize_for_eval(reference);
  const auto cc = ngram_counts(cand, static_cast<size_t>(n));
  const auto rc = ngram_counts(ref, static_cast<size_t>(n));
  size_t overlap = 0;
  for (const auto& [gram, count] : cc) {
    auto it = rc.find(gram);
    if (it != rc.end()) overlap += std::min(count, it->second);
  }
  size_t cand_total = 0, ref_total = 0;
  for (const auto& [gram, count] : cc) cand_total += count;
  for (const auto& [gram, count] : rc) ref_total += count;
  return from_overlap(static_cast<double>(overlap), cand_total, ref_total);
}

RougeTriple rouge_l(const std::string& candidate,
                    const std::string& reference) {
  const auto cand = tokenize_for_eval(candidate);
  const auto ref = tokenize_for_eval(reference);
  const size_t lcs = lcs_length(cand, ref);
  return from_overlap(static_cast<double>(lcs), cand.size(), ref.size());
}

RougeScore rouge_all(const std::string& candidate,
                     const std::string& reference) {
  return RougeScore{rouge_n(candidate, reference, 1),
                    rouge_n(candidate, reference, 2),
                    rouge_l(candidate, reference)};
}

SubpopMetrics compute_metrics(const RawExample& ex) {
  const auto src = tokenize_for_eval(ex.document);
  const auto sum = tokenize_for_eval(ex.summary);
  if (src.empty() || sum.empty()) {
    throw ValidationError(
        "compute_metrics: document or summary has no eval tokens");
  }
  SubpopMetrics m;
  m.length = src.size();
  m.distillation =
      static_cast<double>(src.size()) / static_cast<double>(sum.size());

  if (sum.size() < 2) {
    m.abstractiveness = 0.0;  // no summary bigrams to be absent
  } else {
    std::unordered_set<std::string> src_bigrams;
    for (size_t i = 0; i + 2 <= src.size(); ++i) {
      src_bigrams.insert(src[i] + '\x1f' + src[i + 1]);
    }
    size_t absent = 0;
    const size_t total = sum.size() - 1;
    for (size_t i = 0; i + 2 <= sum.size(); ++i) {
      if (!src_bigrams.count(sum[i] + '\x1f' + sum[i + 1])) ++absent;
    }
    m.abstractiveness = static_cast<double>(absent) /
                        static_cast<double>(total);
  }

  std::unordered_map<std::string, size_t> first_index;
  for (size_t i = 0; i < src.size(); ++i) {
    first_index.emplace(src[i], i);  // keeps the first occurrence
  }
  double pos_sum = 0.0;
  size_t found = 0;
  for (const std::string& w : sum) {
    auto it = first_index.find(w);
    if (it != first_index.end()) {
      pos_sum += static_cast<double>(it->second) /
                 static_cast<double>(src.size());
      ++found;
    }
  }
  m.position = found == 0 ? 1.0 : pos_sum / static_cast<double>(found);
  return m;
}

std::pair<std::vector<size_t>, std::vector<size_t>> slice_deciles(
    const std::vector<RawExample>& corpus, const std::string& metric) {
  if (corpus.size() < 10) {
    throw ValidationError("slice_deciles: corpus has " +
                          std::to_string(corpus.size()) +
                          " examples, need at least 10");
  }
  std::vector<double> values(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    values[i] = metric_value(compute_metrics(corpus[i]), metric);
  }
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  const size_t decile = (corpus.size() + 9) / 10;  // ceil(0.1 N)
  std::vector<size_t> top(order.begin(), order.begin() + decile);
  std::vector<size_t> bottom(order.end() - decile, order.end());
  return {top, bottom};
}

EvalResult evaluate(const ModelParameters& params, const ModelConfig& cfg,
                    const Vocabulary& vocab,
                    const std::vector<RawExample>& corpus, bool with_slices) {
  if (corpus.empty()) throw ValidationError("evaluate: empty corpus");
  EvalResult result;
  result.per_example.reserve(corpus.size());
  for (const RawExample& ex : corpus) {
    const TokenSequence src =
        encode(vocab, ex.document, /*add_frame=*/true, cfg.max_src_len);
    const EncoderOutput ctx = encode(params, cfg, src);
    const TokenSequence pred =
        greedy_decode(params, cfg, ctx, cfg.max_tgt_len);
    result.per_example.push_back(rouge_all(decode(vocab, pred), ex.summary));
  }
  std::vector<size_t> everyone(corpus.size());
  for (size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;
  result.overall = mean_scores(result.per_example, everyone);

  if (with_slices) {
    for (const char* name : kSubpopMetricNames) {
      auto [top, bottom] = slice_deciles(corpus, name);
      SliceScores s;
      s.metric = name;
      s.top = mean_scores(result.per_example, top);
      s.bottom = mean_scores(result.per_example, bottom);
      auto diff = [](const RougeTriple& a, const RougeTriple& b) {
        return RougeTriple{a.precision - b.precision, a.recall - b.recall,
                           a.f1 - b.f1};
      };
      s.gap = RougeScore{diff(s.top.rg1, s.bottom.rg1),
                         diff(s.top.rg2, s.bottom.rg2),
                         diff(s.top.rgl, s.bottom.rgl)};
      result.slices.metrics.push_back(std::move(s));
    }
  }
  return result;
}

void write_slice_csv(const std::string& path, const SliceReport& report) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "metric,slice,rg1,rg2,rgl\n";
  char buf[160];
  for (const SliceScores& s : report.metrics) {
    const std::pair<const char*, const RougeScore*> rows[] = {
        {"top", &s.top}, {"bottom", &s.bottom}, {"gap", &s.gap}};
    for (const auto& [slice, score] : rows) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g\n",
                    s.metric.c_str(), slice, score->rg1.f1, score->rg2.f1,
                    score->rgl.f1);
      os << buf;
    }
  }
  os.flush();
  if (!os) throw IoError("write failed for " + path);
}

}  // namespace contrasum
