#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ccagrade/cca.hpp"
#include "ccagrade/matrix.hpp"

namespace ccagrade {

/// Maximum-likelihood parameters of the latent-state model
///   L ~ N(0, I_dim),  a | L ~ N(w_a L + mu_a, psi_a),  b | L ~ N(w_b L + mu_b, psi_b).
/// By construction w_a w_a^T + psi_a equals the ML (divide-by-k) sample
/// covariance of view a, and likewise for b.
struct PccaParams {
  Eigen::MatrixXd w_a;
  Eigen::MatrixXd w_b;
  Eigen::MatrixXd psi_a;
  Eigen::MatrixXd psi_b;
  Eigen::VectorXd mu_a;
  Eigen::VectorXd mu_b;
  Eigen::Index dim = 0;
};

/// Choice of the dim x dim mixing matrices that turn canonical directions
/// into loadings. Valid mixings satisfy m_a m_b^T = diag(rho) with both
/// spectral norms below one; the default symmetric square root
/// m_a = m_b = diag(rho)^{1/2} always qualifies when rho is clamped below 1.
struct MixingChoice {
  enum class Kind { symmetric_sqrt, custom };

  Kind kind = Kind::symmetric_sqrt;
  std::optional<Eigen::MatrixXd> m_a{};
  std::optional<Eigen::MatrixXd> m_b{};

  static MixingChoice symmetric_sqrt() { return MixingChoice{}; }
  static MixingChoice custom(Eigen::MatrixXd a, Eigen::MatrixXd b) {
    MixingChoice mixing;
    mixing.kind = Kind::custom;
    mixing.m_a = std::move(a);
    mixing.m_b = std::move(b);
    return mixing;
  }
};

/// ML estimates built from the first dim canonical directions:
///   w_a = C_aa u_a m_a,   psi_a = C_aa - w_a w_a^T,   mu_a = sample mean
/// (and symmetrically for b), where C is the ML sample covariance. The CCA
/// step runs with a zero ridge unless config sets one explicitly; the
/// reconstruction identity is exact only without regularization. Throws
/// DimTooLarge when dim exceeds min(m, n, effective rank) and InvalidMixing
/// when a custom mixing violates its constraints.
PccaParams estimate_pcca(const DataMatrix& a, const DataMatrix& b, Eigen::Index dim,
                         const MixingChoice& mixing = {}, const CcaConfig& config = {});

/// The (m+n) x (m+n) joint covariance implied by the parameters:
///   [ w_a w_a^T + psi_a    w_a w_b^T        ]
///   [ w_b w_a^T            w_b w_b^T + psi_b ]
Eigen::MatrixXd model_covariance(const PccaParams& params);

/// Negative log-likelihood of the stacked views under the model, evaluated
/// through a symmetric eigendecomposition of the model covariance:
///   k(m+n)/2 log 2pi + k/2 log|C| + k/2 tr(C^{-1} Ctilde)
///     + k/2 (mutilde - mu)^T C^{-1} (mutilde - mu)
/// with k = n_samples, Ctilde the ML sample covariance of the stacked views
/// and mutilde the stacked sample mean. Throws SingularModelCovariance when
/// the model covariance is not positive definite.
double negative_log_likelihood(const PccaParams& params, const DataMatrix& a,
                               const DataMatrix& b);

/// ML (divide-by-k) covariance of the stacked views [a b]; the quantity the
/// model covariance reproduces at full dim.
Eigen::MatrixXd ml_stacked_covariance(const DataMatrix& a, const DataMatrix& b);

}  // namespace ccagrade
