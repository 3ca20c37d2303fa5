#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ccagrade/grader.hpp"
#include "ccagrade/matrix.hpp"
#include "ccagrade/text.hpp"

namespace ccagrade {

/// One graded student answer from the ingestion CSV. `record_id` names the
/// question (many records share it); the two teacher grades and their mean
/// live on the 0-5 scale.
struct AnswerRecord {
  std::string record_id;
  std::string question;
  std::string desired_answer;
  std::string student_answer;
  double grade_teacher1 = 0.0;
  double grade_teacher2 = 0.0;
  double grade_avg = 0.0;
};

/// RFC-4180 reader: quoted fields may hold commas, quotes ("" escape), and
/// newlines; CRLF and a UTF-8 BOM are tolerated; blank records are skipped.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

/// Writer matching read_csv: fields are quoted only when they need it.
void write_csv(const std::string& path, const std::vector<std::vector<std::string>>& rows);

/// Parses the canonical dataset schema (header names, any column order):
/// id,question,desired_answer,student_answer,score_teacher1,score_teacher2,score_avg.
/// Throws MissingColumn or MalformedRow (the header is row 1); enforces
/// scores in [0,5] and score_avg = mean of the teacher scores within 1e-9.
std::vector<AnswerRecord> load_dataset(const std::string& path);

/// Reduced input for the grade subcommand: columns id, desired_answer,
/// student_answer (extras, including scores, are ignored).
struct PairRecord {
  std::string id;
  std::string desired_answer;
  std::string student_answer;
};
std::vector<PairRecord> load_pairs(const std::string& path);

/// Numeric matrix from CSV: rows are samples, columns variables. A first row
/// that does not parse as numbers is treated as a header and skipped.
DataMatrix load_numeric_csv(const std::string& path);

/// Sample Pearson correlation. Throws on length mismatch, n < 2, non-finite
/// entries, or a constant vector (r undefined there, reported as an error
/// rather than NaN). pearson(x, x) is exactly 1.
double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct EvalOptions {
  GraderConfig grader;
  bool per_question = false;
  unsigned n_threads = 0;  // 0 = one worker per hardware thread
};

struct EvalReport {
  std::size_t n_pairs = 0;
  double pearson_r = 0.0;
  // question id -> r within that question, in first-appearance order; NaN
  // where the correlation is undefined (e.g. every student got the same
  // teacher grade). Filled only when EvalOptions::per_question is set.
  std::vector<std::pair<std::string, double>> per_question_r;
  std::size_t n_empty_answer = 0;
  std::size_t n_rank_truncated = 0;
  std::size_t n_oov_dropped = 0;
  std::vector<double> grades;  // model grades aligned with the input records

  /// Deterministic key=value rendering, one line each, reals at 9 decimals.
  std::string format() const;
};

/// Grades every record (concurrently, results collected in input order) and
/// correlates the model grades with grade_avg.
EvalReport evaluate(const std::vector<AnswerRecord>& records, const EmbeddingTable& table,
                    const EvalOptions& options = {});

}  // namespace ccagrade
