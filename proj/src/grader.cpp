#include "ccagrade/grader.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "ccagrade/errors.hpp"
#include "ccagrade/matrix.hpp"

namespace ccagrade {
namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double safe_cosine(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
}

// Order on shape, then coefficients. Picks a fixed orientation for the fit.
bool view_precedes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols()) return x.cols() < y.cols();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x.data()[i] != y.data()[i]) return x.data()[i] < y.data()[i];
  return false;
}

CcaModel swap_views(CcaModel model) {
  std::swap(model.u_a, model.u_b);
  std::swap(model.mean_a, model.mean_b);
  return model;
}

// A view with its columns in lexicographic order; order maps sorted column j
// back to original column order[j].
struct SortedView {
  Eigen::MatrixXd matrix;
  std::vector<Eigen::Index> order;
};

SortedView sorted_columns(const Eigen::MatrixXd& x) {
  SortedView view;
  view.order.resize(static_cast<std::size_t>(x.cols()));
  std::iota(view.order.begin(), view.order.end(), Eigen::Index{0});
  std::sort(view.order.begin(), view.order.end(), [&x](Eigen::Index i, Eigen::Index j) {
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      if (x(r, i) != x(r, j)) return x(r, i) < x(r, j);
    return false;
  });
  view.matrix.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    view.matrix.col(j) = x.col(view.order[static_cast<std::size_t>(j)]);
  return view;
}

Eigen::MatrixXd unsort_rows(const Eigen::MatrixXd& u, const std::vector<Eigen::Index>& order) {
  Eigen::MatrixXd out(u.rows(), u.cols());
  for (Eigen::Index j = 0; j < u.rows(); ++j)
    out.row(order[static_cast<std::size_t>(j)]) = u.row(j);
  return out;
}

Eigen::VectorXd unsort(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& order) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) out(order[static_cast<std::size_t>(j)]) = v(j);
  return out;
}

}  // namespace

AnswerPair make_answer_pair(const std::string& desired_text, const std::string& student_text,
                            const EmbeddingTable& table, const PreprocessConfig& config,
                            std::string pair_id) {
  AnswerPair pair;
  pair.pair_id = std::move(pair_id);
  auto build = [&](const std::string& text, Eigen::MatrixXd& matrix,
                   std::vector<std::string>& tokens) {
    const std::vector<std::string> candidates = preprocess(text, config);
    if (candidates.empty()) {
      matrix.resize(table.dim, 0);
      return;
    }
    try {
      EmbeddedTokens embedded = embed(candidates, table);
      pair.oov_dropped = pair.oov_dropped || embedded.oov_dropped;
      matrix = std::move(embedded.matrix);
      tokens = std::move(embedded.kept);
    } catch (const EmptyAfterEmbedding&) {
      pair.oov_dropped = true;
      matrix.resize(table.dim, 0);
    }
  };
  build(desired_text, pair.desired, pair.desired_tokens);
  build(student_text, pair.student, pair.student_tokens);
  return pair;
}

GradeResult grade_pair(const AnswerPair& pair, const GraderConfig& config) {
  GradeResult result;
  result.flags.oov_dropped = pair.oov_dropped;
  if (pair.desired.cols() == 0 || pair.student.cols() == 0 || pair.desired.rows() == 0) {
    result.flags.empty_answer = true;
    return result;
  }
  if (pair.desired.rows() != pair.student.rows())
    throw ShapeMismatch("desired and student matrices must share the embedding dimension");

  // Embedding coordinates act as the samples, words as the variables, so the
  // canonical pairs live in word space. The grade is symmetric in the views
  // and order-blind over words by the mathematics; fitting on column-sorted
  // matrices in a fixed view order makes both invariances hold bit for bit
  // instead of only up to SVD round-off.
  const SortedView des = sorted_columns(pair.desired);
  const SortedView stu = sorted_columns(pair.student);
  const bool flipped = view_precedes(stu.matrix, des.matrix);
  const DataMatrix view_a(flipped ? stu.matrix : des.matrix);
  const DataMatrix view_b(flipped ? des.matrix : stu.matrix);
  const CovarianceBlocks blocks = compute_covariance(view_a, view_b);

  // The pair cannot support more canonical directions than the shorter
  // answer has words or the centered data has rank; ridge-stabilized null
  // directions would contribute cosines unrelated to any correlation.
  const Eigen::Index full_dim = std::min(view_a.n_variables(), view_b.n_variables());
  Eigen::Index requested =
      std::min({full_dim, effective_rank(blocks.c_aa), effective_rank(blocks.c_bb)});
  CcaConfig cca = config.cca;
  if (cca.n_components) requested = std::min(requested, *cca.n_components);
  result.flags.rank_truncated = requested < full_dim;
  if (requested == 0) return result;  // zero-variance views carry no signal

  cca.n_components = requested;
  CcaModel model = fit_cca_from_covariance(blocks, cca);
  if (flipped) model = swap_views(std::move(model));  // view a = desired again
  result.dim_used = model.dim;
  result.flags.rank_truncated = model.dim < full_dim;

  Eigen::MatrixXd proj_a = des.matrix * model.u_a;
  Eigen::MatrixXd proj_b = stu.matrix * model.u_b;
  if (config.cosine == CosineMode::centered) {
    proj_a.rowwise() -= proj_a.colwise().mean();
    proj_b.rowwise() -= proj_b.colwise().mean();
  }
  result.per_component_cosine.resize(model.dim);
  for (Eigen::Index j = 0; j < model.dim; ++j)
    result.per_component_cosine(j) = safe_cosine(proj_a.col(j), proj_b.col(j));

  if (des.matrix.cols() == stu.matrix.cols() && des.matrix == stu.matrix) {
    // Identical word sets make every canonical pair coincide, so the cosines
    // are exactly one; spelling that out keeps the grade at 5 to the last bit.
    result.per_component_cosine.setOnes();
  }
  result.mean_cosine = result.per_component_cosine.mean();
  result.grade = 5.0 * clamp01(result.mean_cosine);

  // The returned model addresses words in their original positions.
  model.u_a = unsort_rows(model.u_a, des.order);
  model.u_b = unsort_rows(model.u_b, stu.order);
  model.mean_a = unsort(model.mean_a, des.order);
  model.mean_b = unsort(model.mean_b, stu.order);
  result.model = std::move(model);
  return result;
}

GradeResult grade_pair(const std::string& desired_text, const std::string& student_text,
                       const EmbeddingTable& table, const GraderConfig& config) {
  return grade_pair(make_answer_pair(desired_text, student_text, table, config.preprocess),
                    config);
}

TopWords top_words(const CcaModel& model, const std::vector<std::string>& tokens_a,
                   const std::vector<std::string>& tokens_b, Eigen::Index k) {
  auto rank = [k](const Eigen::MatrixXd& u, const std::vector<std::string>& words) {
    if (static_cast<std::size_t>(u.rows()) != words.size())
      throw ShapeMismatch("one token per row of the canonical directions is required");
    Eigen::VectorXd score = Eigen::VectorXd::Zero(u.rows());
    if (u.cols() > 0) score = u.cwiseAbs().rowwise().maxCoeff();

    std::vector<Eigen::Index> order(words.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return score(a) > score(b); });
    const std::size_t take =
        k <= 0 ? 0 : std::min(words.size(), static_cast<std::size_t>(k));
    std::vector<std::string> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
      out.push_back(words[static_cast<std::size_t>(order[i])]);
    return out;
  };
  return TopWords{rank(model.u_a, tokens_a), rank(model.u_b, tokens_b)};
}

}  // namespace ccagrade
