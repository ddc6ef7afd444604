#pragma once

#include <cstdint>

#include "kshift/kernel.hpp"
#include "kshift/rng.hpp"

namespace kshift {

/// Diagonal training/test covariance spectra. sigma_q is produced by
/// perturbing sigma_p entrywise in inverse scale, so sigma_q <= sigma_p.
struct CovariancePair {
  Vector sigma_p;
  Vector sigma_q;
  double decay_exponent = 0.0;

  Index d() const { return sigma_p.size(); }
  double tau_p() const { return sigma_p.sum() / static_cast<double>(sigma_p.size()); }
  double tau_q() const { return sigma_q.sum() / static_cast<double>(sigma_q.size()); }
};

/// Polynomially decaying spectrum sigma_i ~ i^-a, i = 1..d. With normalize
/// set, rescaled so the mean entry is 1 (tau = 1); otherwise the leading
/// entry is 1.
Vector make_covariance(Index d, double a, bool normalize);

/// (sigma_q)_i = 1 / (1/(sigma_p)_i + eps_i), eps_i ~ Uniform[0,1] iid.
Vector perturb_covariance(const Vector& sigma_p, Rng& rng);

CovariancePair make_covariance_pair(Index d, double a, bool normalize, Rng& rng);

/// n x d design with spectrum pinned to the covariance: draw a Gaussian
/// matrix, orthonormalize (columns when n >= d, rows otherwise), scale so
/// Z^T Z = n I_d (resp. rows of squared norm d), and right-multiply by
/// diag(sigma)^{1/2}. For n >= d the nonzero eigenvalues of X X^T are
/// exactly n * sigma_i.
Matrix sample_design(Rng& rng, Index n, const Vector& sigma);

/// Target function sin(|x|_2^2) applied to each row.
Vector target_values(const Matrix& X);

struct DatasetConfig {
  Index d = 500;
  Index n_train = 500;
  Index n_test = 2500;
  double decay_a = 0.5;
  double sigma_eps = 1.0;
  std::uint64_t seed = 0;
  bool normalize_covariance = true;
};

struct DataEnsemble {
  Matrix X_train;
  Matrix X_test;
  Vector y_train;
  Vector f_rho_train;
  Vector f_rho_test;
  double noise_sd = 0.0;
  CovariancePair covariances;
  std::uint64_t master_seed = 0;
};

/// Fully deterministic ensemble: the seed fixes the covariance perturbation,
/// both designs, and the label noise through independent child streams.
DataEnsemble gen_dataset(const DatasetConfig& config);

/// Same ensemble construction with an externally supplied covariance pair and
/// test design (the sweep shares both across training sizes).
DataEnsemble gen_dataset_with(const DatasetConfig& config, const CovariancePair& pair,
                              const Matrix& X_test, const Vector& f_rho_test);

/// Gaussian-model density ratio w(x) = dq/dp for diagonal covariances,
/// computed in log space:
///   log w = 1/2 sum_i [log(sp_i / sq_i) - x_i^2 (1/sq_i - 1/sp_i)].
double log_density_ratio(const CovariancePair& pair, const Eigen::Ref<const Vector>& x);
double density_ratio(const CovariancePair& pair, const Eigen::Ref<const Vector>& x);

struct WeightingScheme {
  enum class Mode { Unweighted, TrueRatio, TruncatedRatio, Custom };
  Mode mode = Mode::TruncatedRatio;
  double cap = 10.0;  // TruncatedRatio only
  Vector custom;      // Custom only

  static WeightingScheme unweighted();
  static WeightingScheme true_ratio();
  static WeightingScheme truncated_ratio(double cap = 10.0);
  static WeightingScheme custom_weights(Vector w);
};

/// Per-sample importance weights, strictly positive and finite. Raw ratios
/// are clamped to [1e-290, 1e290] so extreme log-ratios cannot underflow the
/// positivity contract.
Vector weight_vector(const WeightingScheme& scheme, const CovariancePair& pair,
                     const Matrix& X_train);

const char* weighting_mode_name(WeightingScheme::Mode mode);

}  // namespace kshift
