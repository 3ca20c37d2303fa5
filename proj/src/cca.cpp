#include "ccagrade/cca.hpp"

#include <algorithm>
#include <cmath>

namespace ccagrade {

namespace {

constexpr double kRankTolerance = 1e-12;     // relative eigenvalue cutoff
constexpr double kDefaultRidgeScale = 1e-8;  // of mean diagonal, per view

void validate_config(const CcaConfig& config) {
  if (config.ridge && (!(*config.ridge >= 0.0) || !std::isfinite(*config.ridge)))
    throw InvalidInput("ridge must be finite and >= 0");
  if (!(config.correlation_clamp > 0.0) || config.correlation_clamp > 1.0)
    throw InvalidInput("correlation_clamp must lie in (0, 1]");
  if (config.n_components && *config.n_components < 1)
    throw InvalidInput("n_components must be >= 1");
}

double ridge_for(const Eigen::MatrixXd& cov, const CcaConfig& config) {
  if (config.ridge) return *config.ridge;
  return kDefaultRidgeScale * cov.trace() / static_cast<double>(cov.rows());
}

// Whitening factor W with W^T (C + ridge I) W = I on the retained subspace.
// Directions whose eigenvalues fall below kRankTolerance of the largest are
// treated as rank-deficient and dropped.
Eigen::MatrixXd whitener(const Eigen::MatrixXd& cov, double ridge) {
  Eigen::MatrixXd regularized = cov;
  regularized.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(regularized);
  if (eigen.info() != Eigen::Success)
    throw NumericalFailure("symmetric eigendecomposition did not converge");

  const Eigen::VectorXd& values = eigen.eigenvalues();  // ascending
  const double largest = values(values.size() - 1);
  const double cutoff = largest > 0.0 ? kRankTolerance * largest : 0.0;

  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (largest > 0.0 && values(i) >= cutoff) ++rank;

  Eigen::MatrixXd w(cov.rows(), rank);
  for (Eigen::Index i = values.size() - rank, j = 0; i < values.size(); ++i, ++j)
    w.col(j) = eigen.eigenvectors().col(i) / std::sqrt(values(i));
  return w;
}

}  // namespace

CovarianceBlocks compute_covariance(const DataMatrix& a, const DataMatrix& b) {
  if (a.n_samples() != b.n_samples())
    throw SampleMismatch("views have different sample counts");
  const Eigen::Index n = a.n_samples();
  if (n < 2) throw DegenerateInput("covariance needs at least two samples");

  CovarianceBlocks blocks;
  blocks.mean_a = a.values.colwise().mean();
  blocks.mean_b = b.values.colwise().mean();

  const Eigen::MatrixXd ac = a.values.rowwise() - blocks.mean_a.transpose();
  const Eigen::MatrixXd bc = b.values.rowwise() - blocks.mean_b.transpose();
  const double denom = static_cast<double>(n - 1);

  blocks.c_aa = (ac.adjoint() * ac) / denom;
  blocks.c_bb = (bc.adjoint() * bc) / denom;
  blocks.c_ab = (ac.adjoint() * bc) / denom;
  blocks.c_aa = ((blocks.c_aa + blocks.c_aa.transpose()) * 0.5).eval();
  blocks.c_bb = ((blocks.c_bb + blocks.c_bb.transpose()) * 0.5).eval();
  return blocks;
}

CcaModel fit_cca_from_covariance(const CovarianceBlocks& blocks, const CcaConfig& config) {
  validate_config(config);
  const Eigen::Index m = blocks.c_aa.rows();
  const Eigen::Index n = blocks.c_bb.rows();
  if (blocks.c_ab.rows() != m || blocks.c_ab.cols() != n)
    throw ShapeMismatch("cross-covariance block has inconsistent shape");

  const Eigen::MatrixXd wa = whitener(blocks.c_aa, ridge_for(blocks.c_aa, config));
  const Eigen::MatrixXd wb = whitener(blocks.c_bb, ridge_for(blocks.c_bb, config));

  Eigen::Index dim = std::min(wa.cols(), wb.cols());
  if (config.n_components) dim = std::min(dim, *config.n_components);

  CcaModel model;
  model.mean_a = blocks.mean_a;
  model.mean_b = blocks.mean_b;
  model.dim = dim;
  if (dim == 0) {
    model.u_a.resize(m, 0);
    model.u_b.resize(n, 0);
    model.rho.resize(0);
    model.rho_raw.resize(0);
    return model;
  }

  const Eigen::MatrixXd whitened = wa.adjoint() * blocks.c_ab * wb;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (!svd.singularValues().allFinite())
    throw NumericalFailure("SVD of whitened cross-covariance did not converge");

  model.u_a = wa * svd.matrixU().leftCols(dim);
  model.u_b = wb * svd.matrixV().leftCols(dim);

  // Deterministic sign: largest-magnitude loading of each u_a column is
  // positive; flipping the paired u_b column keeps rho non-negative.
  for (Eigen::Index j = 0; j < dim; ++j) {
    Eigen::Index at = 0;
    model.u_a.col(j).cwiseAbs().maxCoeff(&at);
    if (model.u_a(at, j) < 0.0) {
      model.u_a.col(j) = -model.u_a.col(j);
      model.u_b.col(j) = -model.u_b.col(j);
    }
  }

  // The ridge only stabilizes the directions; report the correlation each
  // canonical pair actually achieves on the unridged covariance so that the
  // centered cosine of the variates matches rho.
  model.rho_raw.resize(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double var_a = std::max(0.0, model.u_a.col(j).dot(blocks.c_aa * model.u_a.col(j)));
    const double var_b = std::max(0.0, model.u_b.col(j).dot(blocks.c_bb * model.u_b.col(j)));
    const double den = std::sqrt(var_a * var_b);
    model.rho_raw(j) = den > 0.0 ? model.u_a.col(j).dot(blocks.c_ab * model.u_b.col(j)) / den : 0.0;
  }
  model.rho = model.rho_raw.cwiseMin(config.correlation_clamp).cwiseMax(0.0);
  return model;
}

CcaModel fit_cca(const DataMatrix& a, const DataMatrix& b, const CcaConfig& config) {
  return fit_cca_from_covariance(compute_covariance(a, b), config);
}

Eigen::Index effective_rank(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw ShapeMismatch("effective_rank needs a square matrix");
  if (cov.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(cov, Eigen::EigenvaluesOnly);
  if (eigen.info() != Eigen::Success)
    throw NumericalFailure("symmetric eigendecomposition did not converge");
  const Eigen::VectorXd& values = eigen.eigenvalues();  // ascending
  const double largest = values(values.size() - 1);
  if (!(largest > 0.0)) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) >= kRankTolerance * largest) ++rank;
  return rank;
}

ProjectionPair project(const CcaModel& model, const DataMatrix& a, const DataMatrix& b) {
  if (a.n_variables() != model.u_a.rows() || b.n_variables() != model.u_b.rows())
    throw ShapeMismatch("variable counts do not match the fitted model");
  if (a.n_samples() != b.n_samples())
    throw ShapeMismatch("views have different sample counts");

  ProjectionPair projections;
  projections.lambda_a = (a.values.rowwise() - model.mean_a.transpose()) * model.u_a;
  projections.lambda_b = (b.values.rowwise() - model.mean_b.transpose()) * model.u_b;
  return projections;
}

const Eigen::VectorXd& canonical_correlations(const CcaModel& model) { return model.rho; }

}  // namespace ccagrade
