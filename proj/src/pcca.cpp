#include "ccagrade/pcca.hpp"

#include <cmath>

namespace ccagrade {

namespace {

constexpr double kMixingProductTolerance = 1e-10;
constexpr double kPdTolerance = 1e-12;  // relative eigenvalue floor for PD checks

double spectral_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

// Resolves the mixing pair for a fitted rho, enforcing m_a m_b^T = diag(rho)
// and spectral norms strictly below one.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> resolve_mixing(const MixingChoice& mixing,
                                                           const Eigen::VectorXd& rho) {
  const Eigen::Index dim = rho.size();
  if (mixing.kind == MixingChoice::Kind::symmetric_sqrt) {
    Eigen::MatrixXd root = rho.cwiseSqrt().asDiagonal();
    return {root, root};
  }
  if (!mixing.m_a || !mixing.m_b)
    throw InvalidMixing("custom mixing requires both m_a and m_b");
  const Eigen::MatrixXd& ma = *mixing.m_a;
  const Eigen::MatrixXd& mb = *mixing.m_b;
  if (ma.rows() != dim || ma.cols() != dim || mb.rows() != dim || mb.cols() != dim)
    throw InvalidMixing("mixing matrices must be dim x dim");
  const Eigen::MatrixXd product = ma * mb.transpose();
  const Eigen::MatrixXd target = Eigen::MatrixXd(rho.asDiagonal());
  if ((product - target).cwiseAbs().maxCoeff() > kMixingProductTolerance)
    throw InvalidMixing("m_a m_b^T must equal diag(rho)");
  if (spectral_norm(ma) >= 1.0 || spectral_norm(mb) >= 1.0)
    throw InvalidMixing("mixing spectral norms must be smaller than one");
  return {ma, mb};
}

}  // namespace

PccaParams estimate_pcca(const DataMatrix& a, const DataMatrix& b, Eigen::Index dim,
                         const MixingChoice& mixing, const CcaConfig& config) {
  if (dim < 1) throw InvalidInput("latent dimension must be >= 1");
  const Eigen::Index k = a.n_samples();

  // ML convention: the likelihood below is minimized by the divide-by-k
  // covariance, so the Eq.-style construction has to use the same blocks.
  CovarianceBlocks blocks = compute_covariance(a, b);
  const double shrink = static_cast<double>(k - 1) / static_cast<double>(k);
  blocks.c_aa *= shrink;
  blocks.c_bb *= shrink;
  blocks.c_ab *= shrink;

  CcaConfig fit_config = config;
  fit_config.n_components = dim;
  // No regularization unless asked for: the reconstruction identity
  // w w^T + psi = C is exact only when the whitener inverts C itself.
  if (!fit_config.ridge) fit_config.ridge = 0.0;
  const CcaModel model = fit_cca_from_covariance(blocks, fit_config);
  if (model.dim < dim)
    throw DimTooLarge("requested latent dimension exceeds the effective rank");

  const auto [ma, mb] = resolve_mixing(mixing, model.rho);

  PccaParams params;
  params.dim = dim;
  params.mu_a = blocks.mean_a;
  params.mu_b = blocks.mean_b;
  params.w_a = blocks.c_aa * model.u_a * ma;
  params.w_b = blocks.c_bb * model.u_b * mb;
  params.psi_a = blocks.c_aa - params.w_a * params.w_a.transpose();
  params.psi_b = blocks.c_bb - params.w_b * params.w_b.transpose();
  params.psi_a = ((params.psi_a + params.psi_a.transpose()) * 0.5).eval();
  params.psi_b = ((params.psi_b + params.psi_b.transpose()) * 0.5).eval();
  return params;
}

Eigen::MatrixXd model_covariance(const PccaParams& params) {
  const Eigen::Index m = params.w_a.rows();
  const Eigen::Index n = params.w_b.rows();
  Eigen::MatrixXd cov(m + n, m + n);
  cov.topLeftCorner(m, m) = params.w_a * params.w_a.transpose() + params.psi_a;
  cov.topRightCorner(m, n) = params.w_a * params.w_b.transpose();
  cov.bottomLeftCorner(n, m) = cov.topRightCorner(m, n).transpose();
  cov.bottomRightCorner(n, n) = params.w_b * params.w_b.transpose() + params.psi_b;
  return cov;
}

Eigen::MatrixXd ml_stacked_covariance(const DataMatrix& a, const DataMatrix& b) {
  if (a.n_samples() != b.n_samples())
    throw SampleMismatch("views have different sample counts");
  const Eigen::Index k = a.n_samples();
  if (k < 2) throw DegenerateInput("covariance needs at least two samples");
  Eigen::MatrixXd stacked(k, a.n_variables() + b.n_variables());
  stacked << a.values, b.values;
  const Eigen::RowVectorXd mean = stacked.colwise().mean();
  const Eigen::MatrixXd centered = stacked.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.adjoint() * centered) / static_cast<double>(k);
  return ((cov + cov.transpose()) * 0.5).eval();
}

double negative_log_likelihood(const PccaParams& params, const DataMatrix& a,
                               const DataMatrix& b) {
  const Eigen::Index m = params.w_a.rows();
  const Eigen::Index n = params.w_b.rows();
  if (a.n_variables() != m || b.n_variables() != n)
    throw ShapeMismatch("data shapes do not match the parameters");
  if (a.n_samples() != b.n_samples())
    throw SampleMismatch("views have different sample counts");
  const Eigen::Index k = a.n_samples();
  if (k < 2) throw DegenerateInput("likelihood needs at least two samples");

  const Eigen::MatrixXd cov = model_covariance(params);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(cov);
  if (eigen.info() != Eigen::Success)
    throw NumericalFailure("eigendecomposition of model covariance failed");
  const Eigen::VectorXd& values = eigen.eigenvalues();
  const double largest = values(values.size() - 1);
  if (!(largest > 0.0) || values(0) <= kPdTolerance * largest)
    throw SingularModelCovariance("model covariance is not positive definite");

  const double log_det = values.array().log().sum();

  Eigen::MatrixXd stacked(k, m + n);
  stacked << a.values, b.values;
  const Eigen::VectorXd sample_mean = stacked.colwise().mean();
  const Eigen::MatrixXd centered = stacked.rowwise() - sample_mean.transpose();
  const Eigen::MatrixXd sample_cov =
      (centered.adjoint() * centered) / static_cast<double>(k);

  // tr(C^{-1} Ctilde) and the mean quadratic through the eigenbasis.
  const Eigen::MatrixXd basis = eigen.eigenvectors();
  const Eigen::MatrixXd rotated = basis.adjoint() * sample_cov * basis;
  double trace_term = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) trace_term += rotated(i, i) / values(i);

  Eigen::VectorXd mu(m + n);
  mu << params.mu_a, params.mu_b;
  const Eigen::VectorXd delta = basis.adjoint() * (sample_mean - mu);
  const double quad = (delta.array().square() / values.array()).sum();

  const double kd = static_cast<double>(k);
  const double total_dim = static_cast<double>(m + n);
  return 0.5 * kd * (total_dim * std::log(2.0 * M_PI) + log_det + trace_term + quad);
}

}  // namespace ccagrade
