#pragma once

#include <string>
#include <vector>

namespace contrasum {

// One document/summary pair as read from a JSONL corpus line.
struct RawExample {
  std::string document;
  std::string summary;
};

// A document held as its ordered sentence partition; every augmentation is
// defined over this representation.
struct SentenceDocument {
  std::vector<std::string> sentences;
};

// Reads a JSON-lines file where every line is an object with non-empty
// string fields "document" and "summary". Order is preserved.
// Throws IoError (missing file), ParseError (malformed line, named by its
// 1-based number), or ValidationError (empty field).
std::vector<RawExample> load_jsonl(const std::string& path);

// Splits on '.', '!' or '?' when followed by whitespace or end of text; the
// terminator stays attached, a trailing unterminated run becomes the last
// sentence, and whitespace runs inside a sentence collapse to single spaces.
// Throws ValidationError when text is all whitespace.
SentenceDocument split_sentences(const std::string& text);

// Sentences joined with single spaces.
std::string join(const SentenceDocument& doc);

}  // namespace contrasum
