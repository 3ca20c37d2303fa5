#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "ccagrade/errors.hpp"
#include "ccagrade/text.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace ccagrade;

TEST_SUITE_BEGIN("text");

namespace {

// Scratch file that removes itself; load_embeddings only takes paths.
struct TempFile {
  std::filesystem::path path;

  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("ccagrade_text_test_" + std::to_string(counter++) + ".txt");
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("tokenizer splits words on punctuation and keeps numbers") {
  CHECK(tokenize("At the main function.") ==
        std::vector<std::string>{"At", "the", "main", "function"});
  CHECK(tokenize("It costs 42 dollars!") ==
        std::vector<std::string>{"It", "costs", "42", "dollars"});
  CHECK(tokenize("a-b c_d") == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(tokenize("pi is 3.14, not -3") ==
        std::vector<std::string>{"pi", "is", "3.14", "not", "-3"});
  CHECK(tokenize("x2 4x") == std::vector<std::string>{"x2", "4", "x"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("!!! ...") == std::vector<std::string>{});
  CHECK(tokenize("+5 a+b 1.") == std::vector<std::string>{"+5", "a", "b", "1"});
}

TEST_CASE("number tokens are recognized as whole tokens only") {
  CHECK(is_number_token("42"));
  CHECK(is_number_token("3.14"));
  CHECK(is_number_token("-7"));
  CHECK(is_number_token("+2.5"));
  CHECK_FALSE(is_number_token(""));
  CHECK_FALSE(is_number_token("."));
  CHECK_FALSE(is_number_token("1.2.3"));
  CHECK_FALSE(is_number_token("4x"));
  CHECK_FALSE(is_number_token("x4"));
  CHECK_FALSE(is_number_token("-"));
  CHECK_FALSE(is_number_token("3."));
}

TEST_CASE("preprocess lowercases, maps numbers, and drops stopwords") {
  CHECK(preprocess("At the main function.") == std::vector<std::string>{"main", "function"});
  CHECK(preprocess("It costs 42 dollars!") ==
        std::vector<std::string>{"costs", "<num>", "dollars"});

  SUBCASE("each stage can be turned off") {
    PreprocessConfig config;
    config.remove_stopwords = false;
    CHECK(preprocess("At the main function.", config) ==
          std::vector<std::string>{"at", "the", "main", "function"});

    config.lowercase = false;
    CHECK(preprocess("At the main function.", config) ==
          std::vector<std::string>{"At", "the", "main", "function"});

    config.replace_numbers = false;
    CHECK(preprocess("It costs 42 dollars!", config) ==
          std::vector<std::string>{"It", "costs", "42", "dollars"});
  }
  SUBCASE("the number token is configurable") {
    PreprocessConfig config;
    config.number_token = "#";
    CHECK(preprocess("pay 5", config) == std::vector<std::string>{"pay", "#"});
  }
  SUBCASE("stopword matching happens after lowercasing") {
    CHECK(preprocess("THE THEOREM") == std::vector<std::string>{"theorem"});
  }
}

TEST_CASE("the stopword list is fixed and matches the bundled file") {
  CHECK(english_stopwords().size() == 179);
  CHECK(english_stopwords_ordered().size() == 179);
  CHECK(english_stopwords().count("the") == 1);
  CHECK(english_stopwords().count("wouldn't") == 1);
  CHECK(english_stopwords().count("theorem") == 0);

  std::ifstream file(testutil::repo_path("data/stopwords_en.txt"));
  REQUIRE(file.good());
  std::vector<std::string> from_file;
  std::string line;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) from_file.push_back(line);
  }
  CHECK(from_file == english_stopwords_ordered());
}

TEST_CASE("embedding files load into a token-indexed table") {
  const EmbeddingTable table = load_embeddings(testutil::data_path("mini_embeddings.txt"));
  CHECK(table.dim == 8);
  CHECK(table.size() == 57);
  CHECK(table.contains("main"));
  CHECK(table.contains("<num>"));
  CHECK_FALSE(table.contains("zzzqq"));
  CHECK(table.vectors.at("main").size() == 8);

  SUBCASE("an explicit dimension must match the file") {
    CHECK_NOTHROW(load_embeddings(testutil::data_path("mini_embeddings.txt"), 8));
    CHECK_THROWS_AS(load_embeddings(testutil::data_path("mini_embeddings.txt"), 5),
                    DimensionMismatch);
  }
  SUBCASE("a vocabulary filter keeps only requested tokens") {
    const std::unordered_set<std::string> vocab{"main", "function", "absent"};
    const EmbeddingTable small =
        load_embeddings(testutil::data_path("mini_embeddings.txt"), {}, &vocab);
    CHECK(small.size() == 2);
    CHECK(small.dim == 8);
    CHECK(small.contains("main"));
    CHECK_FALSE(small.contains("software"));
  }
}

TEST_CASE("embedding loader rejects broken input") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_embeddings("/nonexistent/embeddings.txt"), IoError);
  }
  SUBCASE("empty file") {
    const TempFile file("");
    CHECK_THROWS_AS(load_embeddings(file.path.string()), EmptyFile);
  }
  SUBCASE("only blank lines") {
    const TempFile file("\n\n\n");
    CHECK_THROWS_AS(load_embeddings(file.path.string()), EmptyFile);
  }
  SUBCASE("unparseable coordinate reports its line") {
    const TempFile file("good 1.0 2.0\nbad 1.0 oops\n");
    try {
      load_embeddings(file.path.string());
      FAIL("expected MalformedLine");
    } catch (const MalformedLine& err) {
      CHECK(err.line_number == 2);
      CHECK(std::string(err.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("token without coordinates") {
    const TempFile file("lonely\n");
    CHECK_THROWS_AS(load_embeddings(file.path.string()), MalformedLine);
  }
  SUBCASE("ragged widths") {
    const TempFile file("one 1.0 2.0\ntwo 1.0\n");
    CHECK_THROWS_AS(load_embeddings(file.path.string()), DimensionMismatch);
  }
  SUBCASE("non-finite coordinates") {
    const TempFile file("weird nan 1.0\n");
    CHECK_THROWS_AS(load_embeddings(file.path.string()), MalformedLine);
  }
}

TEST_CASE("embedding loader tolerates real-world file quirks") {
  SUBCASE("CRLF endings and blank lines") {
    const TempFile file("aa 1.0 2.0\r\n\r\nbb 3.0 4.0\r\n");
    const EmbeddingTable table = load_embeddings(file.path.string());
    CHECK(table.size() == 2);
    CHECK(table.vectors.at("bb")(1) == 4.0);
  }
  SUBCASE("duplicate tokens: the last definition wins") {
    const TempFile file("tok 1.0\ntok 2.0\n");
    const EmbeddingTable table = load_embeddings(file.path.string());
    CHECK(table.size() == 1);
    CHECK(table.vectors.at("tok")(0) == 2.0);
  }
  SUBCASE("a large filtered file stays cheap to load") {
    std::string contents;
    contents.reserve(1u << 21);
    char line[128];
    for (int i = 0; i < 50000; ++i) {
      std::snprintf(line, sizeof line, "tok%d %d.5 %d.25 0.125\n", i, i % 7, i % 11);
      contents += line;
    }
    const TempFile file(contents);
    const std::unordered_set<std::string> vocab{"tok42", "tok49999"};
    const EmbeddingTable table = load_embeddings(file.path.string(), 3, &vocab);
    CHECK(table.size() == 2);
    CHECK(table.vectors.at("tok42")(0) == 0.5);
    CHECK(table.vectors.at("tok49999")(2) == 0.125);
  }
}

TEST_CASE("embedding tokens keeps order and flags misses") {
  EmbeddingTable table;
  table.dim = 2;
  table.vectors["aa"] = Eigen::Vector2d(1.0, 2.0);
  table.vectors["bb"] = Eigen::Vector2d(3.0, 4.0);

  SUBCASE("all tokens known") {
    const EmbeddedTokens out = embed({"bb", "aa", "bb"}, table);
    CHECK(out.kept == std::vector<std::string>{"bb", "aa", "bb"});
    CHECK_FALSE(out.oov_dropped);
    CHECK(out.matrix.rows() == 2);
    CHECK(out.matrix.cols() == 3);
    CHECK(out.matrix(0, 1) == 1.0);
    CHECK(out.matrix(1, 0) == 4.0);
  }
  SUBCASE("unknown tokens are dropped but remembered") {
    const EmbeddedTokens out = embed({"aa", "missing", "bb"}, table);
    CHECK(out.kept == std::vector<std::string>{"aa", "bb"});
    CHECK(out.oov_dropped);
    CHECK(out.matrix.cols() == 2);
  }
  SUBCASE("nothing embeddable is an error") {
    CHECK_THROWS_AS(embed({"missing", "gone"}, table), EmptyAfterEmbedding);
    CHECK_THROWS_AS(embed({}, table), EmptyAfterEmbedding);
  }
}

TEST_SUITE_END();
