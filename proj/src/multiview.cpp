#include "ccagrade/multiview.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ccagrade/errors.hpp"

namespace ccagrade {
namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr double kPseudoRankTolerance = 1e-12;
constexpr double kRidgeFallbackScale = 1e-8;
constexpr double kMaxConditionNumber = 1e6;

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidSpec(what);
}

void check_symmetric_psd(const Eigen::MatrixXd& s, const std::string& name) {
  require(s.rows() == s.cols(), name + " must be square");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  require((s - s.transpose()).cwiseAbs().maxCoeff() <= kPsdTolerance * scale,
          name + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  require(eig.eigenvalues()(0) >= -kPsdTolerance * scale, name + " must be positive semidefinite");
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd sample_normal_matrix(NormalSampler& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng();
  return out;
}

// Minimum-norm solve of s*x = rhs for symmetric PSD s; eigenvalues below the
// relative cutoff are treated as exact zeros.
Eigen::VectorXd pseudo_solve(const Eigen::MatrixXd& s, const Eigen::VectorXd& rhs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double largest = values(values.size() - 1);
  if (!(largest > 0.0)) throw DegenerateInput("covariance has no positive eigenvalues");
  const double cutoff = largest * kPseudoRankTolerance;
  Eigen::VectorXd rotated = eig.eigenvectors().transpose() * rhs;
  for (Eigen::Index i = 0; i < rotated.size(); ++i)
    rotated(i) = values(i) > cutoff ? rotated(i) / values(i) : 0.0;
  return eig.eigenvectors() * rotated;
}

double condition_number(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues()(0);
  const double largest = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return largest / smallest;
}

}  // namespace

void validate_spec(const TwoViewSpec& spec) {
  require(spec.dim_latent >= 1, "dim_latent must be >= 1");
  require(spec.m >= spec.dim_latent && spec.n >= spec.dim_latent,
          "each view must have at least dim_latent variables");
  require(spec.w1.rows() == spec.m && spec.w1.cols() == spec.dim_latent, "w1 must be m x dim_latent");
  require(spec.w2.rows() == spec.n && spec.w2.cols() == spec.dim_latent, "w2 must be n x dim_latent");
  require(spec.mu1.size() == spec.m && spec.mu2.size() == spec.n, "mean sizes must match views");
  require(spec.target_weights.size() == spec.dim_latent, "target_weights must have dim_latent entries");
  require(spec.w1.allFinite() && spec.w2.allFinite() && spec.mu1.allFinite() &&
              spec.mu2.allFinite() && spec.psi1.allFinite() && spec.psi2.allFinite() &&
              spec.target_weights.allFinite(),
          "spec contains non-finite values");
  require(std::isfinite(spec.target_noise_var) && spec.target_noise_var >= 0.0,
          "target_noise_var must be finite and >= 0");
  require(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(spec.w1).rank() == spec.dim_latent,
          "w1 must have full column rank");
  require(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(spec.w2).rank() == spec.dim_latent,
          "w2 must have full column rank");
  check_symmetric_psd(spec.psi1, "psi1");
  check_symmetric_psd(spec.psi2, "psi2");
  require(spec.psi1.rows() == spec.m, "psi1 must be m x m");
  require(spec.psi2.rows() == spec.n, "psi2 must be n x n");
}

TwoViewSample generate_two_view(const TwoViewSpec& spec, Eigen::Index n_samples,
                                std::uint64_t seed) {
  validate_spec(spec);
  if (n_samples < 1) throw DegenerateInput("n_samples must be >= 1");
  NormalSampler rng(seed);
  // Draw order is part of the contract: latent block, view-1 noise, view-2
  // noise, then target noise, each filled row by row.
  Eigen::MatrixXd latent = sample_normal_matrix(rng, n_samples, spec.dim_latent);
  Eigen::MatrixXd eps1 = sample_normal_matrix(rng, n_samples, spec.m);
  Eigen::MatrixXd eps2 = sample_normal_matrix(rng, n_samples, spec.n);
  Eigen::VectorXd target_eps = sample_normal_matrix(rng, n_samples, 1).col(0);

  Eigen::MatrixXd a1 = latent * spec.w1.transpose() + eps1 * symmetric_sqrt(spec.psi1);
  a1.rowwise() += spec.mu1.transpose();
  Eigen::MatrixXd a2 = latent * spec.w2.transpose() + eps2 * symmetric_sqrt(spec.psi2);
  a2.rowwise() += spec.mu2.transpose();
  Eigen::VectorXd z = latent * spec.target_weights + std::sqrt(spec.target_noise_var) * target_eps;
  return TwoViewSample{DataMatrix(std::move(a1)), DataMatrix(std::move(a2)), std::move(z),
                       std::move(latent)};
}

PopulationCovariances population_covariances(const TwoViewSpec& spec) {
  validate_spec(spec);
  PopulationCovariances cov;
  cov.c11 = spec.w1 * spec.w1.transpose() + spec.psi1;
  cov.c22 = spec.w2 * spec.w2.transpose() + spec.psi2;
  cov.c12 = spec.w1 * spec.w2.transpose();
  cov.c1z = spec.w1 * spec.target_weights;
  cov.c2z = spec.w2 * spec.target_weights;
  return cov;
}

LinearPredictor fit_linear_predictor(const DataMatrix& x, const Eigen::VectorXd& z) {
  if (x.n_samples() != z.size())
    throw SampleMismatch("predictor inputs disagree on sample count");
  if (x.n_samples() < 2) throw DegenerateInput("need at least 2 samples to fit a predictor");
  if (!z.allFinite()) throw DegenerateInput("target contains non-finite values");

  const Eigen::RowVectorXd mean_x = x.values.colwise().mean();
  const double mean_z = z.mean();
  Eigen::MatrixXd xc = x.values.rowwise() - mean_x;
  Eigen::VectorXd zc = z.array() - mean_z;

  LinearPredictor fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
  if (qr.rank() == xc.cols()) {
    fit.weights = qr.solve(zc);
  } else {
    Eigen::MatrixXd gram = xc.transpose() * xc;
    const double ridge = kRidgeFallbackScale * std::max(gram.trace() / double(gram.cols()), 1.0);
    gram.diagonal().array() += ridge;
    fit.weights = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(xc.transpose() * zc);
    fit.ridge_fallback = true;
  }
  fit.intercept = mean_z - mean_x.dot(fit.weights);
  return fit;
}

double lemma2_check_population(const TwoViewSpec& spec, std::optional<Eigen::Index> truncate_to) {
  validate_spec(spec);
  const Eigen::Index dim = truncate_to.value_or(spec.dim_latent);
  if (dim < 1 || dim > spec.dim_latent)
    throw InvalidSpec("truncate_to must lie in [1, dim_latent]");

  PopulationCovariances cov = population_covariances(spec);
  CovarianceBlocks blocks;
  blocks.c_aa = cov.c11;
  blocks.c_bb = cov.c22;
  blocks.c_ab = cov.c12;
  blocks.mean_a = Eigen::VectorXd::Zero(spec.m);
  blocks.mean_b = Eigen::VectorXd::Zero(spec.n);
  CcaConfig config;
  config.n_components = dim;
  config.ridge = 0.0;
  CcaModel model = fit_cca_from_covariance(blocks, config);
  if (model.dim < dim) throw NumericalFailure("population CCA lost rank");

  double worst = 0.0;
  const std::pair<const Eigen::MatrixXd*, const Eigen::VectorXd*> views[] = {
      {&cov.c11, &cov.c1z}, {&cov.c22, &cov.c2z}};
  const Eigen::MatrixXd* bases[] = {&model.u_a, &model.u_b};
  for (int v = 0; v < 2; ++v) {
    const Eigen::MatrixXd& cvv = *views[v].first;
    const Eigen::VectorXd& cvz = *views[v].second;
    const Eigen::MatrixXd& u = *bases[v];
    Eigen::VectorXd beta_full = pseudo_solve(cvv, cvz);
    Eigen::VectorXd beta_proj = pseudo_solve(u.transpose() * cvv * u, u.transpose() * cvz);
    worst = std::max(worst, (beta_full - u * beta_proj).cwiseAbs().maxCoeff());
  }
  return worst;
}

double lemma2_check_empirical(const TwoViewSpec& spec, Eigen::Index n_samples,
                              std::uint64_t seed) {
  if (n_samples < 100) throw DegenerateInput("empirical check needs n_samples >= 100");
  TwoViewSample sample = generate_two_view(spec, n_samples, seed);
  const Eigen::Index n_train = (n_samples * 8) / 10;
  const Eigen::Index n_test = n_samples - n_train;

  DataMatrix train1(sample.a1.values.topRows(n_train));
  DataMatrix train2(sample.a2.values.topRows(n_train));
  Eigen::VectorXd z_train = sample.z.head(n_train);
  DataMatrix test1(sample.a1.values.bottomRows(n_test));

  CcaConfig config;
  config.n_components = spec.dim_latent;
  CcaModel model = fit_cca(train1, train2, config);
  if (model.dim < spec.dim_latent) throw NumericalFailure("empirical CCA lost rank");

  LinearPredictor full = fit_linear_predictor(train1, z_train);
  Eigen::MatrixXd proj_train =
      (train1.values.rowwise() - model.mean_a.transpose()) * model.u_a;
  LinearPredictor projected = fit_linear_predictor(DataMatrix(proj_train), z_train);

  Eigen::VectorXd pred_full =
      (test1.values * full.weights).array() + full.intercept;
  Eigen::MatrixXd proj_test = (test1.values.rowwise() - model.mean_a.transpose()) * model.u_a;
  Eigen::VectorXd pred_projected = (proj_test * projected.weights).array() + projected.intercept;
  return (pred_full - pred_projected).squaredNorm() / double(n_test);
}

TwoViewSpec random_two_view_spec(Eigen::Index dim_latent, Eigen::Index m, Eigen::Index n,
                                 NormalSampler& rng) {
  if (dim_latent < 1 || m < dim_latent || n < dim_latent)
    throw InvalidSpec("need m, n >= dim_latent >= 1");
  for (int attempt = 0; attempt < 100; ++attempt) {
    TwoViewSpec spec;
    spec.dim_latent = dim_latent;
    spec.m = m;
    spec.n = n;
    spec.w1 = sample_normal_matrix(rng, m, dim_latent);
    spec.w2 = sample_normal_matrix(rng, n, dim_latent);
    Eigen::VectorXd d1(m), d2(n);
    for (Eigen::Index i = 0; i < m; ++i) d1(i) = 0.5 + rng.uniform();
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = 0.5 + rng.uniform();
    spec.psi1 = d1.asDiagonal();
    spec.psi2 = d2.asDiagonal();
    spec.mu1 = sample_normal_matrix(rng, m, 1).col(0);
    spec.mu2 = sample_normal_matrix(rng, n, 1).col(0);
    spec.target_weights = sample_normal_matrix(rng, dim_latent, 1).col(0);
    spec.target_noise_var = 0.1;
    PopulationCovariances cov = population_covariances(spec);
    if (condition_number(cov.c11) <= kMaxConditionNumber &&
        condition_number(cov.c22) <= kMaxConditionNumber)
      return spec;
  }
  throw NumericalFailure("could not draw a well-conditioned spec in 100 attempts");
}

}  // namespace ccagrade
