#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ccagrade/matrix.hpp"

namespace ccagrade {

/// Sample covariance blocks of a two-view dataset. c_aa and c_bb are
/// symmetric positive semidefinite by construction; the cross block c_ab is
/// m x n. Normalization is unbiased (divide by n_samples - 1).
struct CovarianceBlocks {
  Eigen::MatrixXd c_aa;
  Eigen::MatrixXd c_bb;
  Eigen::MatrixXd c_ab;
  Eigen::VectorXd mean_a;
  Eigen::VectorXd mean_b;
};

/// Solver knobs.
///   n_components  empty = auto: min(m, n, effective ranks)
///   ridge         diagonal regularizer added to c_aa and c_bb before
///                 whitening; empty = scale-aware default of
///                 1e-8 * trace(C)/dim(C) per view
///   correlation_clamp  upper clamp applied to the canonical correlations,
///                 in (0, 1]; the default keeps them strictly below one
struct CcaConfig {
  std::optional<Eigen::Index> n_components{};
  std::optional<double> ridge{};
  double correlation_clamp = 1.0 - 1e-9;
};

/// Fitted canonical correlation model. Columns of u_a/u_b are paired
/// directions normalized so that the canonical variates have unit variance:
/// u_a^T (C_aa + ridge I) u_a = I. rho_raw holds the correlation each pair
/// of variates actually achieves on the unridged covariance (the ridge only
/// stabilizes the directions), ordered by the whitened singular values;
/// rho is rho_raw clamped into [0, correlation_clamp]. A variate with zero
/// variance has no defined correlation and reports 0.
struct CcaModel {
  Eigen::MatrixXd u_a;
  Eigen::MatrixXd u_b;
  Eigen::VectorXd rho;
  Eigen::VectorXd rho_raw;
  Eigen::VectorXd mean_a;
  Eigen::VectorXd mean_b;
  Eigen::Index dim = 0;
};

/// Canonical variates of the two views: lambda_a = (a - mean_a) u_a and
/// likewise for b. Matched columns are maximally correlated, mismatched
/// columns uncorrelated.
struct ProjectionPair {
  Eigen::MatrixXd lambda_a;
  Eigen::MatrixXd lambda_b;
};

/// Unbiased sample covariance of two views with equal sample counts.
/// Throws SampleMismatch on row-count disagreement, DegenerateInput when
/// fewer than two samples are given.
CovarianceBlocks compute_covariance(const DataMatrix& a, const DataMatrix& b);

/// Solves CCA given covariance blocks: whiten both views through a symmetric
/// eigendecomposition (dropping eigenvalues below 1e-12 of the largest), take
/// the SVD of the whitened cross-covariance, de-whiten the singular vectors.
/// Signs are fixed so the largest-magnitude entry of each u_a column is
/// positive. The requested component count is reduced silently when the
/// effective ranks are smaller.
CcaModel fit_cca_from_covariance(const CovarianceBlocks& blocks, const CcaConfig& config = {});

/// compute_covariance followed by fit_cca_from_covariance.
CcaModel fit_cca(const DataMatrix& a, const DataMatrix& b, const CcaConfig& config = {});

/// Number of eigenvalues above 1e-12 of the largest — the rank rule the
/// whitening step applies at zero ridge, usable to cap component counts when
/// fitting with a ridge. Throws ShapeMismatch on a non-square input.
Eigen::Index effective_rank(const Eigen::MatrixXd& cov);

/// Centered projections of both views onto the canonical directions.
/// Throws ShapeMismatch when column counts disagree with the model or the
/// two views have different sample counts.
ProjectionPair project(const CcaModel& model, const DataMatrix& a, const DataMatrix& b);

/// The canonical correlations of a fitted model, non-increasing.
const Eigen::VectorXd& canonical_correlations(const CcaModel& model);

}  // namespace ccagrade
