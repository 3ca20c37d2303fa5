#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "ccagrade/cca.hpp"
#include "ccagrade/matrix.hpp"
#include "ccagrade/rng.hpp"

namespace ccagrade {

/// Ground truth for the conditional-independence generative model: a latent
/// state L ~ N(0, I) drives two observed views through loadings w1/w2 plus
/// Gaussian noise, and a scalar target z = target_weights^T L + noise.
struct TwoViewSpec {
  Eigen::Index dim_latent = 0;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Eigen::MatrixXd w1;  // m x dim_latent, full column rank
  Eigen::MatrixXd w2;  // n x dim_latent, full column rank
  Eigen::MatrixXd psi1;  // m x m, PSD
  Eigen::MatrixXd psi2;  // n x n, PSD
  Eigen::VectorXd mu1;
  Eigen::VectorXd mu2;
  Eigen::VectorXd target_weights;  // dim_latent
  double target_noise_var = 0.0;
};

/// A draw from the model. The latent rows are retained for diagnostics.
struct TwoViewSample {
  DataMatrix a1;
  DataMatrix a2;
  Eigen::VectorXd z;
  Eigen::MatrixXd latent;
};

/// Ordinary least squares fit, weights on centered data plus an intercept.
struct LinearPredictor {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  bool ridge_fallback = false;  // set when rank deficiency forced a ridge solve
};

/// Exact second moments implied by a spec; no sampling involved.
///   c11 = w1 w1^T + psi1,  c12 = w1 w2^T,  c1z = w1 target_weights, ...
struct PopulationCovariances {
  Eigen::MatrixXd c11;
  Eigen::MatrixXd c22;
  Eigen::MatrixXd c12;
  Eigen::VectorXd c1z;
  Eigen::VectorXd c2z;
};

/// Throws InvalidSpec when shapes disagree, psi blocks are not PSD, or a
/// loading matrix is column-rank deficient.
void validate_spec(const TwoViewSpec& spec);

/// Deterministic draw of n_samples rows; identical seeds yield bit-identical
/// output. Noise is injected through the symmetric square roots of psi1/psi2.
TwoViewSample generate_two_view(const TwoViewSpec& spec, Eigen::Index n_samples,
                                std::uint64_t seed);

PopulationCovariances population_covariances(const TwoViewSpec& spec);

/// Least squares on centered data through a rank-revealing QR; falls back to
/// a small ridge solve (and flags it) when x is rank deficient.
LinearPredictor fit_linear_predictor(const DataMatrix& x, const Eigen::VectorXd& z);

/// Population-level check of the projection-preserves-prediction identity:
/// computes CCA directions from the exact covariances, forms the optimal
/// linear coefficients for z from each raw view and from its projection, and
/// returns the larger max-abs deviation of beta_full - U beta_proj across the
/// two views. Passing truncate_to below dim_latent deliberately violates the
/// identity's rank hypothesis (negative control).
double lemma2_check_population(const TwoViewSpec& spec,
                               std::optional<Eigen::Index> truncate_to = {});

/// Empirical counterpart: fit CCA and both predictors on an 80% train split,
/// return the mean squared difference of the two predictions on the held-out
/// 20%. Requires n_samples >= 100.
double lemma2_check_empirical(const TwoViewSpec& spec, Eigen::Index n_samples,
                              std::uint64_t seed);

/// Random spec with standard-normal loadings, diagonal noise, and a condition
/// cap of 1e6 on the view covariances (rejection sampled).
TwoViewSpec random_two_view_spec(Eigen::Index dim_latent, Eigen::Index m, Eigen::Index n,
                                 NormalSampler& rng);

}  // namespace ccagrade
