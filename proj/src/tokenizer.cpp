#include "contrasum/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "contrasum/errors.hpp"

namespace contrasum {

namespace {

std::string normalize_word(const std::string& raw) {
  size_t begin = 0, end = raw.size();
  while (begin < end && std::ispunct(static_cast<unsigned char>(raw[begin]))) {
    ++begin;
  }
  while (end > begin &&
         std::ispunct(static_cast<unsigned char>(raw[end - 1]))) {
    --end;
  }
  std::string out;
  out.reserve(end - begin);
  for (size_t i = begin; i < end; ++i) {
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize_for_model(const std::string& text) {
  std::vector<std::string> words;
  std::string raw;
  auto flush = [&] {
    if (!raw.empty()) {
      std::string w = normalize_word(raw);
      if (!w.empty()) words.push_back(std::move(w));
      raw.clear();
    }
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      raw += c;
    }
  }
  flush();
  return words;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= id_to_token_.size()) {
    throw ValidationError("token id " + std::to_string(id) +
                          " out of range [0, " +
                          std::to_string(id_to_token_.size()) + ")");
  }
  return id_to_token_[static_cast<size_t>(id)];
}

Vocabulary Vocabulary::build(const std::vector<RawExample>& examples,
                             size_t max_size, int min_freq) {
  if (examples.empty()) {
    throw ValidationError("build_vocab: empty corpus");
  }
  if (max_size < 4) {
    throw ValidationError("build_vocab: max_size must be at least 4");
  }
  // Ordered map gives the lexicographic half of the tie-break for free.
  std::map<std::string, size_t> counts;
  for (const RawExample& ex : examples) {
    for (const std::string& w : tokenize_for_model(ex.document)) ++counts[w];
    for (const std::string& w : tokenize_for_model(ex.summary)) ++counts[w];
  }
  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(),
                                                     counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;  // stable: ties stay sorted
                   });
  Vocabulary v;
  v.max_size_ = max_size;
  v.min_freq_ = min_freq;
  for (int i = 0; i < 4; ++i) {
    v.id_to_token_.emplace_back(kReservedTokens[i]);
    v.token_to_id_[kReservedTokens[i]] = i;
  }
  for (const auto& [word, count] : ranked) {
    if (v.id_to_token_.size() >= max_size) break;
    if (count < static_cast<size_t>(min_freq)) continue;
    v.token_to_id_[word] = static_cast<int>(v.id_to_token_.size());
    v.id_to_token_.push_back(word);
  }
  return v;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (const std::string& t : id_to_token_) os << t << '\n';
  os.flush();
  if (!os) throw IoError("write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  Vocabulary v;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno <= 4) {
      if (line != kReservedTokens[lineno - 1]) {
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": expected reserved token " +
                         kReservedTokens[lineno - 1]);
      }
    } else if (line.empty()) {
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": empty token");
    } else if (v.token_to_id_.count(line)) {
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": duplicate token '" + line + "'");
    }
    v.token_to_id_[line] = static_cast<int>(v.id_to_token_.size());
    v.id_to_token_.push_back(line);
  }
  if (v.id_to_token_.size() < 4) {
    throw ParseError(path + ": fewer than 4 reserved token lines");
  }
  v.max_size_ = v.id_to_token_.size();
  v.min_freq_ = 1;
  return v;
}

TokenSequence encode(const Vocabulary& v, const std::string& text,
                     bool add_frame, size_t max_len) {
  if (max_len < 1 || (add_frame && max_len < 2)) {
    throw ContractError("encode: max_len too small for requested framing");
  }
  const std::vector<std::string> words = tokenize_for_model(text);
  if (words.empty() && !add_frame) {
    throw ValidationError("encode: text has no tokens");
  }
  TokenSequence ids;
  ids.reserve(words.size() + 2);
  if (add_frame) ids.push_back(kBosId);
  for (const std::string& w : words) ids.push_back(v.id(w));
  if (add_frame) ids.push_back(kEosId);
  if (ids.size() > max_len) {
    ids.resize(max_len);
    if (add_frame) ids.back() = kEosId;
  }
  return ids;
}

std::string decode(const Vocabulary& v, const TokenSequence& ids) {
  std::string out;
  for (int id : ids) {
    const std::string& tok = v.token(id);
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

}  // namespace contrasum
