#include "kshift/synthdata.hpp"

#include <Eigen/QR>
#include <cmath>

namespace kshift {

Vector make_covariance(Index d, double a, bool normalize) {
  if (d < 1) throw DataError("make_covariance: d must be >= 1");
  if (a < 0.0) throw DataError("make_covariance: decay exponent must be >= 0");
  Vector sigma(d);
  for (Index i = 0; i < d; ++i) sigma(i) = std::pow(static_cast<double>(i + 1), -a);
  if (normalize) sigma *= static_cast<double>(d) / sigma.sum();
  return sigma;
}

Vector perturb_covariance(const Vector& sigma_p, Rng& rng) {
  Vector sigma_q(sigma_p.size());
  for (Index i = 0; i < sigma_p.size(); ++i) {
    if (!(sigma_p(i) > 0.0)) throw DataError("perturb_covariance: nonpositive entry");
    sigma_q(i) = 1.0 / (1.0 / sigma_p(i) + rng.uniform());
  }
  return sigma_q;
}

CovariancePair make_covariance_pair(Index d, double a, bool normalize, Rng& rng) {
  CovariancePair pair;
  pair.sigma_p = make_covariance(d, a, normalize);
  pair.sigma_q = perturb_covariance(pair.sigma_p, rng);
  pair.decay_exponent = a;
  return pair;
}

namespace {

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
  Matrix G(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) G(i, j) = rng.normal();
  return G;
}

// Thin Q factor with a rank check on R's diagonal.
bool thin_q(const Matrix& G, Matrix& Q) {
  Eigen::HouseholderQR<Matrix> qr(G);
  const Index k = std::min(G.rows(), G.cols());
  const Vector rdiag = qr.matrixQR().diagonal().head(k).cwiseAbs();
  if (rdiag.minCoeff() < 1e-12 * rdiag.maxCoeff()) return false;
  Q = qr.householderQ() * Matrix::Identity(G.rows(), k);
  return true;
}

}  // namespace

Matrix sample_design(Rng& rng, Index n, const Vector& sigma) {
  if (n < 1) throw DataError("sample_design: n must be >= 1");
  const Index d = sigma.size();
  const Vector root = sigma.cwiseSqrt();

  for (int attempt = 0; attempt < 2; ++attempt) {
    const Matrix G = gaussian_matrix(rng, n, d);
    Matrix Q;
    if (n >= d) {
      if (!thin_q(G, Q)) continue;                       // Q: n x d, orthonormal columns
      Matrix Z = std::sqrt(static_cast<double>(n)) * Q;  // Z^T Z = n I_d
      return Z * root.asDiagonal();
    }
    if (!thin_q(G.transpose(), Q)) continue;             // Q: d x n, orthonormal columns
    Matrix Z = std::sqrt(static_cast<double>(d)) * Q.transpose();  // rows of squared norm d
    return Z * root.asDiagonal();
  }
  throw DataError("sample_design: rank-deficient Gaussian draw twice in a row");
}

Vector target_values(const Matrix& X) {
  Vector f(X.rows());
  for (Index i = 0; i < X.rows(); ++i) f(i) = std::sin(X.row(i).squaredNorm());
  return f;
}

DataEnsemble gen_dataset(const DatasetConfig& config) {
  if (config.d < 1 || config.n_train < 1 || config.n_test < 1)
    throw DataError("gen_dataset: all counts must be >= 1");
  Rng cov_rng(mix64(config.seed, 1));
  const CovariancePair pair =
      make_covariance_pair(config.d, config.decay_a, config.normalize_covariance, cov_rng);

  Rng test_rng(mix64(config.seed, 3));
  const Matrix X_test = sample_design(test_rng, config.n_test, pair.sigma_q);
  return gen_dataset_with(config, pair, X_test, target_values(X_test));
}

DataEnsemble gen_dataset_with(const DatasetConfig& config, const CovariancePair& pair,
                              const Matrix& X_test, const Vector& f_rho_test) {
  if (config.sigma_eps < 0.0) throw DataError("gen_dataset: sigma_eps must be >= 0");
  DataEnsemble e;
  e.covariances = pair;
  e.master_seed = config.seed;
  e.noise_sd = config.sigma_eps;

  Rng train_rng(mix64(config.seed, 2));
  e.X_train = sample_design(train_rng, config.n_train, pair.sigma_p);
  e.X_test = X_test;
  e.f_rho_train = target_values(e.X_train);
  e.f_rho_test = f_rho_test;

  Rng noise_rng(mix64(config.seed, 4));
  e.y_train = e.f_rho_train;
  if (config.sigma_eps > 0.0)
    for (Index i = 0; i < e.y_train.size(); ++i)
      e.y_train(i) += config.sigma_eps * noise_rng.normal();
  return e;
}

double log_density_ratio(const CovariancePair& pair, const Eigen::Ref<const Vector>& x) {
  if (x.size() != pair.d()) throw DataError("density_ratio: dimension mismatch");
  double log_w = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double sp = pair.sigma_p(i);
    const double sq = pair.sigma_q(i);
    if (!(sp > 0.0) || !(sq > 0.0))
      throw DataError("density_ratio: nonpositive covariance entry");
    log_w += 0.5 * (std::log(sp / sq) - x(i) * x(i) * (1.0 / sq - 1.0 / sp));
  }
  return log_w;
}

double density_ratio(const CovariancePair& pair, const Eigen::Ref<const Vector>& x) {
  return std::exp(log_density_ratio(pair, x));
}

namespace {

constexpr double kWeightFloor = 1e-290;
constexpr double kWeightCeil = 1e290;

double clamp_weight(double w) { return std::min(std::max(w, kWeightFloor), kWeightCeil); }

}  // namespace

WeightingScheme WeightingScheme::unweighted() { return {Mode::Unweighted, 0.0, {}}; }
WeightingScheme WeightingScheme::true_ratio() { return {Mode::TrueRatio, 0.0, {}}; }
WeightingScheme WeightingScheme::truncated_ratio(double cap) {
  if (!(cap > 0.0)) throw ConfigError("truncated_ratio: cap must be positive");
  return {Mode::TruncatedRatio, cap, {}};
}
WeightingScheme WeightingScheme::custom_weights(Vector w) {
  return {Mode::Custom, 0.0, std::move(w)};
}

Vector weight_vector(const WeightingScheme& scheme, const CovariancePair& pair,
                     const Matrix& X_train) {
  const Index n = X_train.rows();
  switch (scheme.mode) {
    case WeightingScheme::Mode::Unweighted:
      return Vector::Ones(n);
    case WeightingScheme::Mode::TrueRatio: {
      Vector w(n);
      for (Index i = 0; i < n; ++i)
        w(i) = clamp_weight(std::exp(log_density_ratio(pair, X_train.row(i).transpose())));
      return w;
    }
    case WeightingScheme::Mode::TruncatedRatio: {
      Vector w(n);
      for (Index i = 0; i < n; ++i) {
        const double raw = std::exp(log_density_ratio(pair, X_train.row(i).transpose()));
        w(i) = clamp_weight(std::min(raw, scheme.cap));
      }
      return w;
    }
    case WeightingScheme::Mode::Custom: {
      if (scheme.custom.size() != n)
        throw DataError("weight_vector: custom weight length != n");
      for (Index i = 0; i < n; ++i)
        if (!std::isfinite(scheme.custom(i)) || !(scheme.custom(i) > 0.0))
          throw DataError("weight_vector: custom weights must be positive and finite");
      return scheme.custom;
    }
  }
  throw ConfigError("weight_vector: unknown weighting mode");
}

const char* weighting_mode_name(WeightingScheme::Mode mode) {
  switch (mode) {
    case WeightingScheme::Mode::Unweighted: return "unweighted";
    case WeightingScheme::Mode::TrueRatio: return "true_ratio";
    case WeightingScheme::Mode::TruncatedRatio: return "truncated_ratio";
    case WeightingScheme::Mode::Custom: return "custom";
  }
  return "unknown";
}

}  // namespace kshift
