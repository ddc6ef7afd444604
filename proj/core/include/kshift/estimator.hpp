#pragma once

#include "kshift/kernel.hpp"
#include "kshift/rng.hpp"

namespace kshift {

/// Dual solution of the weighted ridge system
///   (K + lambda n diag(weights)^{-1}) c = targets.
/// jitter records the diagonal shift applied if the factorization had to be
/// stabilized (0 when the plain factorization succeeded).
struct FittedEstimator {
  Vector coefficients;
  double lambda = 0.0;
  Vector weights;
  double jitter = 0.0;

  Index n() const { return coefficients.size(); }
};

FittedEstimator fit(const Matrix& K, const Vector& targets, double lambda,
                    const Vector& weights);

/// fit() with the noiseless targets f_rho(x_i).
FittedEstimator fit_noiseless(const Matrix& K, const Vector& f_rho_train, double lambda,
                              const Vector& weights);

Vector predict(const FittedEstimator& est, const Matrix& cross);

/// Relative optimality residual |(K + lambda n W^-1) c - y| / |y|; re-checks
/// the solver contract after the fact.
double fit_residual(const Matrix& K, const FittedEstimator& est, const Vector& targets);

struct BiasVarianceReport {
  double bias_sq = 0.0;
  double variance = 0.0;
  double excess_risk = 0.0;  // bias_sq + variance by construction
  Index n_test = 0;
};

/// Exact conditional bias/variance of the weighted estimator under iid
/// homoskedastic noise of sd sigma_eps:
///   bias^2  = mean_j (f_hat(x_j) - f_rho(x_j))^2 with noiseless targets,
///   variance = sigma_eps^2 * mean_j | (K + lambda n W^-1)^{-1} k_j |^2.
BiasVarianceReport decompose(const Matrix& K, const Matrix& cross_test,
                             const Vector& f_rho_train, const Vector& f_rho_test,
                             double lambda, const Vector& weights, double sigma_eps);

struct McRiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int draws = 0;
};

/// Monte-Carlo estimate of the excess risk: refits on fresh noise draws and
/// averages the mean squared test error. Validates the closed-form
/// decomposition.
McRiskEstimate excess_risk_mc_detail(const Matrix& K, const Matrix& cross_test,
                                     const Vector& f_rho_train, const Vector& f_rho_test,
                                     double lambda, const Vector& weights, double sigma_eps,
                                     int n_draws, Rng& rng);

double excess_risk_mc(const Matrix& K, const Matrix& cross_test, const Vector& f_rho_train,
                      const Vector& f_rho_test, double lambda, const Vector& weights,
                      double sigma_eps, int n_draws, Rng& rng);

}  // namespace kshift
