#include "contrasum/corpus.hpp"

#include <cctype>
#include <fstream>

#include "contrasum/errors.hpp"
#include "json.hpp"

namespace contrasum {

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool all_ws(const std::string& s) {
  for (char c : s) {
    if (!is_ws(c)) return false;
  }
  return true;
}

}  // namespace

std::vector<RawExample> load_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::vector<RawExample> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (all_ws(line)) continue;  // blank separators and trailing newlines
    const std::string where = path + ": line " + std::to_string(lineno);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!obj.is_object()) throw ParseError(where + ": not a JSON object");
    for (const char* key : {"document", "summary"}) {
      if (!obj.contains(key)) {
        throw ParseError(where + ": missing \"" + key + "\"");
      }
      if (!obj[key].is_string()) {
        throw ParseError(where + ": \"" + key + "\" is not a string");
      }
    }
    RawExample ex{obj["document"].get<std::string>(),
                  obj["summary"].get<std::string>()};
    if (all_ws(ex.document)) {
      throw ValidationError(where + ": empty \"document\"");
    }
    if (all_ws(ex.summary)) {
      throw ValidationError(where + ": empty \"summary\"");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

SentenceDocument split_sentences(const std::string& text) {
  std::vector<std::string> sentences;
  std::string cur;
  bool pending_space = false;
  const size_t n = text.size();
  for (size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (is_ws(c)) {
      pending_space = !cur.empty();
      continue;
    }
    if (pending_space) {
      cur += ' ';
      pending_space = false;
    }
    cur += c;
    const bool terminator = c == '.' || c == '!' || c == '?';
    if (terminator && (i + 1 >= n || is_ws(text[i + 1]))) {
      sentences.push_back(cur);
      cur.clear();
      pending_space = false;
    }
  }
  if (!cur.empty()) sentences.push_back(cur);
  if (sentences.empty()) {
    throw ValidationError("split_sentences: text is empty or all whitespace");
  }
  return SentenceDocument{std::move(sentences)};
}

std::string join(const SentenceDocument& doc) {
  std::string out;
  for (size_t i = 0; i < doc.sentences.size(); ++i) {
    if (i > 0) out += ' ';
    out += doc.sentences[i];
  }
  return out;
}

}  // namespace contrasum
