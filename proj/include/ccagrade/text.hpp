#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ccagrade {

/// Word-vector lookup loaded from the whitespace text format
/// `token v1 v2 ... vd`, one token per line.
struct EmbeddingTable {
  Eigen::Index dim = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors;

  bool contains(const std::string& token) const { return vectors.count(token) != 0; }
  std::size_t size() const { return vectors.size(); }
};

/// Loads an embedding file. `expected_dim`, when set, rejects files whose
/// vectors have any other width; otherwise the first line fixes the width.
/// `vocab_filter`, when non-null, keeps only listed tokens and skips float
/// parsing for the rest, which is what makes large files affordable.
/// Throws IoError, EmptyFile, MalformedLine, or DimensionMismatch.
EmbeddingTable load_embeddings(const std::string& path,
                               std::optional<Eigen::Index> expected_dim = {},
                               const std::unordered_set<std::string>* vocab_filter = nullptr);

struct PreprocessConfig {
  bool lowercase = true;
  bool replace_numbers = true;
  std::string number_token = "<num>";
  bool remove_stopwords = true;
};

/// Splits raw text into word and number tokens; punctuation separates tokens
/// and is never emitted. A word is a letter followed by alphanumerics. A
/// number is [+-]?digits[.digits], the sign counted only when a digit follows.
std::vector<std::string> tokenize(const std::string& text);

/// True when the token as a whole parses as a number per the tokenizer rule.
bool is_number_token(const std::string& token);

/// tokenize -> lowercase -> number replacement -> stopword removal, with each
/// stage individually switchable.
std::vector<std::string> preprocess(const std::string& text, const PreprocessConfig& config = {});

/// The fixed English stopword list (179 entries) used by preprocess.
const std::unordered_set<std::string>& english_stopwords();

/// Same list in its bundled order, for round-trip checks against the data file.
const std::vector<std::string>& english_stopwords_ordered();

/// Result of mapping tokens through an embedding table: one column per token
/// found, rows are the embedding coordinates.
struct EmbeddedTokens {
  Eigen::MatrixXd matrix;              // dim x n_kept
  std::vector<std::string> kept;       // tokens that had vectors, in order
  bool oov_dropped = false;            // true when at least one token was missing
};

/// Throws EmptyAfterEmbedding when no token has a vector.
EmbeddedTokens embed(const std::vector<std::string>& tokens, const EmbeddingTable& table);

}  // namespace ccagrade
