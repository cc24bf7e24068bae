#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "contrasum/corpus.hpp"

namespace contrasum {

// Reserved token ids, fixed for every vocabulary.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr const char* kReservedTokens[4] = {"<pad>", "<unk>", "<bos>",
                                                   "<eos>"};

using TokenSequence = std::vector<int>;

// Word-level vocabulary: ids are dense 0..V-1 with the four reserved ids
// first, then words ranked by descending frequency (ties: lexicographic).
class Vocabulary {
 public:
  int id(const std::string& token) const;  // UNK when absent
  const std::string& token(int id) const;  // ValidationError when id >= V
  size_t size() const { return id_to_token_.size(); }

  size_t max_size() const { return max_size_; }
  int min_freq() const { return min_freq_; }

  // Builds from every document and summary. Model tokenization: lowercase,
  // split on whitespace, strip leading/trailing punctuation. max_size caps
  // the total id count including the four reserved ids; words seen fewer
  // than min_freq times are dropped.
  static Vocabulary build(const std::vector<RawExample>& examples,
                          size_t max_size, int min_freq);

  // Plain-text persistence: one token per line, the four reserved tokens on
  // lines 1-4, then words in id order.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  size_t max_size_ = 0;
  int min_freq_ = 1;
};

// The model-side word tokenizer (eval has its own, different rule).
std::vector<std::string> tokenize_for_model(const std::string& text);

// Unknown words become UNK. With add_frame, BOS is prepended and EOS
// appended; truncation to max_len keeps EOS last on framed sequences.
TokenSequence encode(const Vocabulary& v, const std::string& text,
                     bool add_frame, size_t max_len = SIZE_MAX);

// Drops PAD/BOS/EOS, renders UNK as "<unk>", joins with single spaces.
std::string decode(const Vocabulary& v, const TokenSequence& ids);

}  // namespace contrasum
