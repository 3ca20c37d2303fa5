#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ccagrade/cca.hpp"
#include "ccagrade/text.hpp"

namespace ccagrade {

/// One desired/student pair in sentence-matrix form: embedding coordinates
/// are the rows (samples), the answer's words the columns. The token lists
/// label the matrix columns for diagnostics such as top_words. An answer
/// with no embeddable words becomes a zero-column matrix rather than an
/// error so batch grading can flag it instead of aborting.
struct AnswerPair {
  Eigen::MatrixXd desired;
  Eigen::MatrixXd student;
  std::vector<std::string> desired_tokens;
  std::vector<std::string> student_tokens;
  std::string pair_id;
  bool oov_dropped = false;  // the embedding lookup skipped at least one token
};

/// Preprocesses and embeds both texts into an AnswerPair.
AnswerPair make_answer_pair(const std::string& desired_text, const std::string& student_text,
                            const EmbeddingTable& table, const PreprocessConfig& config = {},
                            std::string pair_id = {});

/// How the per-component similarity is measured between the two projected
/// views. `uncentered` is the default: cosine between the raw (not
/// mean-subtracted) canonical variates. `centered` subtracts the means first,
/// which turns each cosine into the component's sample correlation.
enum class CosineMode { uncentered, centered };

struct GraderConfig {
  PreprocessConfig preprocess;  // only the text overload of grade_pair uses this
  CosineMode cosine = CosineMode::uncentered;
  CcaConfig cca;
};

struct GradeFlags {
  bool empty_answer = false;    // a side had no embeddable tokens; grade forced to 0
  bool rank_truncated = false;  // fewer canonical pairs than the word counts allow
  bool oov_dropped = false;     // at least one token lacked an embedding vector
};

struct GradeResult {
  double grade = 0.0;                    // 5 * clamp(mean_cosine, 0, 1), exactly
  double mean_cosine = 0.0;
  Eigen::VectorXd per_component_cosine;  // one entry per canonical component
  Eigen::Index dim_used = 0;             // canonical pairs actually compared
  GradeFlags flags;
  CcaModel model;                        // the per-pair fit, kept for diagnostics
};

/// Grades one pair: fit CCA between the two word sets, project both views
/// onto their canonical directions, and average the per-component cosines.
/// The component count is min(word counts) capped by the effective rank of
/// each view's centered covariance (at most embedding dimension - 1); any
/// cap sets rank_truncated. Degenerate input never throws here; it yields
/// grade 0 with the matching flag so batch runs survive blank rows. Two
/// identical matrices grade exactly 5. The grade is exactly symmetric in
/// the two answers and exactly invariant to word order within an answer.
GradeResult grade_pair(const AnswerPair& pair, const GraderConfig& config = {});

/// Convenience wrapper: make_answer_pair + grade_pair.
GradeResult grade_pair(const std::string& desired_text, const std::string& student_text,
                       const EmbeddingTable& table, const GraderConfig& config = {});

/// The most influential words of each view, best first: a word's score is
/// its largest absolute loading across the model's canonical directions.
/// Asking for more words than a view has returns them all, unpadded; k <= 0
/// returns empty lists.
struct TopWords {
  std::vector<std::string> view_a;
  std::vector<std::string> view_b;
};
TopWords top_words(const CcaModel& model, const std::vector<std::string>& tokens_a,
                   const std::vector<std::string>& tokens_b, Eigen::Index k);

}  // namespace ccagrade
