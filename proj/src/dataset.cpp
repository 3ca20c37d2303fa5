#include "ccagrade/dataset.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iterator>
#include <limits>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "ccagrade/errors.hpp"

namespace ccagrade {
namespace {

constexpr double kAvgTolerance = 1e-9;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open csv file: " + path);
  std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("read failure on csv file: " + path);
  return content;
}

bool blank_record(const std::vector<std::string>& row) {
  return row.size() == 1 && row[0].empty();
}

double parse_score(const std::string& text, long row_no, const char* column) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw MalformedRow(std::string("unparseable ") + column, row_no);
  if (value < 0.0 || value > 5.0)
    throw MalformedRow(std::string(column) + " outside [0, 5]", row_no);
  return value;
}

std::unordered_map<std::string, std::size_t> header_index(const std::vector<std::string>& header) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(header[i], i);
  return index;
}

std::size_t require_column(const std::unordered_map<std::string, std::size_t>& index,
                           const std::string& name) {
  auto it = index.find(name);
  if (it == index.end()) throw MissingColumn("missing column: " + name);
  return it->second;
}

void require_field_count(const std::vector<std::string>& row, std::size_t expected, long row_no) {
  if (row.size() != expected)
    throw MalformedRow(
        "expected " + std::to_string(expected) + " fields, got " + std::to_string(row.size()),
        row_no);
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  const std::string content = read_file(path);
  std::size_t i = 0;
  if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;
  long line = 1;
  long quote_open_line = 0;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    quoted_field = false;
  };
  auto end_record = [&] {
    end_field();
    if (!blank_record(row)) rows.push_back(std::move(row));
    row.clear();
  };

  const std::size_t n = content.size();
  while (i < n) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && content[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        if (i < n && content[i] != ',' && content[i] != '\n' && content[i] != '\r')
          throw MalformedLine("text after closing quote", line);
        continue;
      }
      if (c == '\n') ++line;
      field.push_back(c);
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || quoted_field)
          throw MalformedLine("stray quote inside field", line);
        in_quotes = true;
        quoted_field = true;
        quote_open_line = line;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        ++i;
        if (i < n && content[i] == '\n') ++i;
        ++line;
        end_record();
        break;
      case '\n':
        ++i;
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
        ++i;
        break;
    }
  }
  if (in_quotes) throw MalformedLine("unterminated quoted field", quote_open_line);
  if (!field.empty() || !row.empty() || quoted_field) end_record();
  return rows;
}

void write_csv(const std::string& path, const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open csv file for writing: " + path);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i != 0) out.put(',');
      const std::string& f = row[i];
      if (f.find_first_of(",\"\r\n") != std::string::npos) {
        out.put('"');
        for (char c : f) {
          if (c == '"') out.put('"');
          out.put(c);
        }
        out.put('"');
      } else {
        out.write(f.data(), static_cast<std::streamsize>(f.size()));
      }
    }
    out.put('\n');
  }
  out.flush();
  if (!out) throw IoError("write failure on csv file: " + path);
}

std::vector<AnswerRecord> load_dataset(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw EmptyFile("dataset has no header row: " + path);
  const auto index = header_index(rows[0]);
  const std::size_t col_id = require_column(index, "id");
  const std::size_t col_question = require_column(index, "question");
  const std::size_t col_desired = require_column(index, "desired_answer");
  const std::size_t col_student = require_column(index, "student_answer");
  const std::size_t col_t1 = require_column(index, "score_teacher1");
  const std::size_t col_t2 = require_column(index, "score_teacher2");
  const std::size_t col_avg = require_column(index, "score_avg");

  std::vector<AnswerRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const long row_no = static_cast<long>(r) + 1;  // the header is row 1
    const auto& row = rows[r];
    require_field_count(row, rows[0].size(), row_no);
    AnswerRecord rec;
    rec.record_id = row[col_id];
    rec.question = row[col_question];
    rec.desired_answer = row[col_desired];
    rec.student_answer = row[col_student];
    rec.grade_teacher1 = parse_score(row[col_t1], row_no, "score_teacher1");
    rec.grade_teacher2 = parse_score(row[col_t2], row_no, "score_teacher2");
    rec.grade_avg = parse_score(row[col_avg], row_no, "score_avg");
    if (std::abs(rec.grade_avg - 0.5 * (rec.grade_teacher1 + rec.grade_teacher2)) > kAvgTolerance)
      throw MalformedRow("score_avg is not the mean of the teacher scores", row_no);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<PairRecord> load_pairs(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw EmptyFile("pairs file has no header row: " + path);
  const auto index = header_index(rows[0]);
  const std::size_t col_id = require_column(index, "id");
  const std::size_t col_desired = require_column(index, "desired_answer");
  const std::size_t col_student = require_column(index, "student_answer");

  std::vector<PairRecord> pairs;
  pairs.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    require_field_count(row, rows[0].size(), static_cast<long>(r) + 1);
    pairs.push_back(PairRecord{row[col_id], row[col_desired], row[col_student]});
  }
  return pairs;
}

DataMatrix load_numeric_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw EmptyFile("numeric csv is empty: " + path);

  auto parse_row = [](const std::vector<std::string>& row, std::vector<double>& out) {
    out.clear();
    out.reserve(row.size());
    for (const std::string& f : row) {
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(value)) return false;
      out.push_back(value);
    }
    return true;
  };

  std::vector<double> buffer;
  std::size_t start = 0;
  if (!parse_row(rows[0], buffer)) start = 1;  // header row
  if (start >= rows.size()) throw EmptyFile("numeric csv has a header but no data: " + path);

  std::vector<std::vector<double>> data;
  data.reserve(rows.size() - start);
  for (std::size_t r = start; r < rows.size(); ++r) {
    if (!parse_row(rows[r], buffer))
      throw MalformedRow("unparseable numeric field", static_cast<long>(r) + 1);
    if (!data.empty() && buffer.size() != data.front().size())
      throw MalformedRow("inconsistent field count", static_cast<long>(r) + 1);
    data.push_back(buffer);
  }

  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()),
                    static_cast<Eigen::Index>(data.front().size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = data[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return DataMatrix(std::move(m));
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw SampleMismatch("pearson inputs differ in length");
  if (x.size() < 2) throw DegenerateInput("pearson needs at least 2 observations");
  if (!x.allFinite() || !y.allFinite()) throw DegenerateInput("pearson inputs must be finite");
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sx = (dx * dx).sum();
  const double sy = (dy * dy).sum();
  if (sx == 0.0 || sy == 0.0) throw DegenerateInput("pearson is undefined for a constant vector");
  // sqrt(sx*sy) rather than sqrt(sx)*sqrt(sy): with x == y this is sqrt(sx^2),
  // which IEEE arithmetic returns exactly, so self-correlation is exactly 1.
  return (dx * dy).sum() / std::sqrt(sx * sy);
}

EvalReport evaluate(const std::vector<AnswerRecord>& records, const EmbeddingTable& table,
                    const EvalOptions& options) {
  if (records.empty()) throw DegenerateInput("no records to evaluate");

  std::vector<GradeResult> results(records.size());
  std::size_t n_threads =
      options.n_threads != 0 ? options.n_threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, records.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        results[i] = grade_pair(records[i].desired_answer, records[i].student_answer, table,
                                options.grader);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  EvalReport report;
  report.n_pairs = records.size();
  report.grades.resize(records.size());
  Eigen::VectorXd model(static_cast<Eigen::Index>(records.size()));
  Eigen::VectorXd gold(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    report.grades[i] = results[i].grade;
    model(static_cast<Eigen::Index>(i)) = results[i].grade;
    gold(static_cast<Eigen::Index>(i)) = records[i].grade_avg;
    report.n_empty_answer += results[i].flags.empty_answer ? 1 : 0;
    report.n_rank_truncated += results[i].flags.rank_truncated ? 1 : 0;
    report.n_oov_dropped += results[i].flags.oov_dropped ? 1 : 0;
  }
  report.pearson_r = pearson(model, gold);

  if (options.per_question) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto [it, inserted] = groups.try_emplace(records[i].record_id);
      if (inserted) order.push_back(records[i].record_id);
      it->second.push_back(i);
    }
    for (const std::string& id : order) {
      const auto& idx = groups[id];
      double r = std::numeric_limits<double>::quiet_NaN();
      if (idx.size() >= 2) {
        Eigen::VectorXd m(static_cast<Eigen::Index>(idx.size()));
        Eigen::VectorXd g(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) {
          m(static_cast<Eigen::Index>(j)) = results[idx[j]].grade;
          g(static_cast<Eigen::Index>(j)) = records[idx[j]].grade_avg;
        }
        try {
          r = pearson(m, g);
        } catch (const DegenerateInput&) {
          // constant grades within the question: leave NaN
        }
      }
      report.per_question_r.emplace_back(id, r);
    }
  }
  return report;
}

std::string EvalReport::format() const {
  auto real = [](double v) -> std::string {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
  };
  std::string out;
  out += "n_pairs=" + std::to_string(n_pairs) + "\n";
  out += "pearson_r=" + real(pearson_r) + "\n";
  out += "flag_counts.empty_answer=" + std::to_string(n_empty_answer) + "\n";
  out += "flag_counts.rank_truncated=" + std::to_string(n_rank_truncated) + "\n";
  out += "flag_counts.oov_dropped=" + std::to_string(n_oov_dropped) + "\n";
  for (const auto& [id, r] : per_question_r) out += "per_question_r." + id + "=" + real(r) + "\n";
  return out;
}

}  // namespace ccagrade
