#include "ccagrade/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <utility>

#include "ccagrade/errors.hpp"

namespace ccagrade {
namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (is_letter(c)) {
      std::size_t j = i + 1;
      while (j < n && is_alnum(text[j])) ++j;
      tokens.emplace_back(text, i, j - i);
      i = j;
    } else if (is_digit(c) ||
               ((c == '+' || c == '-') && i + 1 < n && is_digit(text[i + 1]))) {
      std::size_t j = i;
      if (text[j] == '+' || text[j] == '-') ++j;
      while (j < n && is_digit(text[j])) ++j;
      if (j + 1 < n && text[j] == '.' && is_digit(text[j + 1])) {
        ++j;
        while (j < n && is_digit(text[j])) ++j;
      }
      tokens.emplace_back(text, i, j - i);
      i = j;
    } else {
      ++i;  // punctuation and whitespace separate tokens
    }
  }
  return tokens;
}

bool is_number_token(const std::string& token) {
  std::size_t i = 0;
  const std::size_t n = token.size();
  if (i < n && (token[i] == '+' || token[i] == '-')) ++i;
  const std::size_t digits_start = i;
  while (i < n && is_digit(token[i])) ++i;
  if (i == digits_start) return false;
  if (i < n && token[i] == '.') {
    ++i;
    const std::size_t frac_start = i;
    while (i < n && is_digit(token[i])) ++i;
    if (i == frac_start) return false;
  }
  return i == n;
}

std::vector<std::string> preprocess(const std::string& text, const PreprocessConfig& config) {
  std::vector<std::string> tokens = tokenize(text);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  const auto& stops = english_stopwords();
  for (std::string& token : tokens) {
    if (config.lowercase)
      for (char& ch : token) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (config.replace_numbers && is_number_token(token)) token = config.number_token;
    if (config.remove_stopwords && stops.count(token) != 0) continue;
    out.push_back(std::move(token));
  }
  return out;
}

EmbeddingTable load_embeddings(const std::string& path, std::optional<Eigen::Index> expected_dim,
                               const std::unordered_set<std::string>* vocab_filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings file: " + path);
  EmbeddingTable table;
  if (expected_dim) {
    if (*expected_dim < 1) throw InvalidInput("expected_dim must be >= 1");
    table.dim = *expected_dim;
  }

  std::string line;
  std::vector<double> buffer;
  long line_no = 0;
  bool saw_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    saw_content = true;

    const std::size_t sep = line.find_first_of(" \t");
    if (sep == std::string::npos) throw MalformedLine("token without vector values", line_no);
    std::string token = line.substr(0, sep);
    if (vocab_filter != nullptr && vocab_filter->count(token) == 0) continue;

    buffer.clear();
    const char* ptr = line.data() + sep;
    const char* end = line.data() + line.size();
    while (ptr < end) {
      while (ptr < end && (*ptr == ' ' || *ptr == '\t')) ++ptr;
      if (ptr >= end) break;
      double value = 0.0;
      auto [next, ec] = std::from_chars(ptr, end, value);
      if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t'))
        throw MalformedLine("unparseable vector value", line_no);
      if (!std::isfinite(value)) throw MalformedLine("non-finite vector value", line_no);
      buffer.push_back(value);
      ptr = next;
    }
    if (buffer.empty()) throw MalformedLine("token without vector values", line_no);

    if (table.dim == 0) {
      table.dim = static_cast<Eigen::Index>(buffer.size());
    } else if (static_cast<Eigen::Index>(buffer.size()) != table.dim) {
      throw DimensionMismatch("vector on line " + std::to_string(line_no) + " has " +
                              std::to_string(buffer.size()) + " values, expected " +
                              std::to_string(table.dim));
    }
    table.vectors[std::move(token)] =
        Eigen::Map<const Eigen::VectorXd>(buffer.data(), static_cast<Eigen::Index>(buffer.size()));
  }
  if (in.bad()) throw IoError("read failure on embeddings file: " + path);
  if (!saw_content) throw EmptyFile("embeddings file is empty: " + path);
  return table;
}

EmbeddedTokens embed(const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  EmbeddedTokens out;
  std::vector<const Eigen::VectorXd*> columns;
  columns.reserve(tokens.size());
  for (const std::string& token : tokens) {
    auto it = table.vectors.find(token);
    if (it == table.vectors.end()) {
      out.oov_dropped = true;
      continue;
    }
    columns.push_back(&it->second);
    out.kept.push_back(token);
  }
  if (columns.empty()) throw EmptyAfterEmbedding("no token has an embedding vector");
  out.matrix.resize(table.dim, static_cast<Eigen::Index>(columns.size()));
  for (Eigen::Index j = 0; j < out.matrix.cols(); ++j) out.matrix.col(j) = *columns[static_cast<std::size_t>(j)];
  return out;
}

}  // namespace ccagrade
