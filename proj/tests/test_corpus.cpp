#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "contrasum/corpus.hpp"
#include "contrasum/errors.hpp"

using namespace contrasum;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = "corpus_test_" + std::to_string(counter++) + ".jsonl";
    std::ofstream os(path, std::ios::binary);
    os << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_jsonl reads one example per line") {
  TempFile f(
      "{\"document\":\"A b. C d.\",\"summary\":\"ab\"}\n"
      "{\"document\":\"X y.\",\"summary\":\"xy\",\"extra\":1}\n");
  const std::vector<RawExample> ex = load_jsonl(f.path);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].document == "A b. C d.");
  CHECK(ex[0].summary == "ab");
  CHECK(ex[1].document == "X y.");  // unknown fields are ignored
}

TEST_CASE("load_jsonl skips blank lines and reports errors with line numbers") {
  TempFile ok("{\"document\":\"A.\",\"summary\":\"a\"}\n\n"
              "{\"document\":\"B.\",\"summary\":\"b\"}\n");
  CHECK(load_jsonl(ok.path).size() == 2);

  TempFile bad("{\"document\":\"A.\",\"summary\":\"a\"}\n"
               "{\"document\":\"B.\",\"summary\":\"b\"}\n"
               "{not json}\n");
  try {
    load_jsonl(bad.path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("load_jsonl rejects structural problems") {
  CHECK_THROWS_AS(load_jsonl("does_not_exist.jsonl"), IoError);
  TempFile missing_key("{\"document\":\"A.\"}\n");
  CHECK_THROWS_AS(load_jsonl(missing_key.path), ParseError);
  TempFile non_string("{\"document\":5,\"summary\":\"a\"}\n");
  CHECK_THROWS_AS(load_jsonl(non_string.path), ParseError);
  TempFile non_object("[1,2]\n");
  CHECK_THROWS_AS(load_jsonl(non_object.path), ParseError);
  TempFile blank_field("{\"document\":\"   \",\"summary\":\"a\"}\n");
  CHECK_THROWS_AS(load_jsonl(blank_field.path), ValidationError);
}

TEST_CASE("split_sentences cuts after ., ! or ? followed by whitespace") {
  const SentenceDocument d = split_sentences("A b. C d! E");
  CHECK(d.sentences == std::vector<std::string>{"A b.", "C d!", "E"});
}

TEST_CASE("split_sentences keeps a document with no terminator whole") {
  CHECK(split_sentences("One sentence").sentences ==
        std::vector<std::string>{"One sentence"});
  CHECK(split_sentences("Ends with period.").sentences ==
        std::vector<std::string>{"Ends with period."});
}

TEST_CASE("split_sentences cannot see abbreviations") {
  // "Dr. Smith left." splits after "Dr." — the scanner is deliberately
  // simple-minded and this pins that behavior.
  CHECK(split_sentences("Dr. Smith left.").sentences ==
        std::vector<std::string>{"Dr.", "Smith left."});
}

TEST_CASE("split_sentences collapses runs of whitespace") {
  const SentenceDocument d = split_sentences("A  b.\n\tC   d.");
  CHECK(d.sentences == std::vector<std::string>{"A b.", "C d."});
  CHECK_THROWS_AS(split_sentences("   \t\n "), ValidationError);
}

TEST_CASE("question and exclamation marks end sentences too") {
  const SentenceDocument d = split_sentences("Really? Yes! Fine.");
  CHECK(d.sentences == std::vector<std::string>{"Really?", "Yes!", "Fine."});
}

TEST_CASE("join is the inverse of split on normalized text") {
  const std::string text = "A b. C d! E f?";
  CHECK(join(split_sentences(text)) == text);
  const SentenceDocument d{{"One.", "Two.", "Three."}};
  CHECK(join(d) == "One. Two. Three.");
  CHECK(split_sentences(join(d)).sentences == d.sentences);
}
