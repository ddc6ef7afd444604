#include "kshift/estimator.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace kshift {

namespace {

struct WeightedSystem {
  Matrix M;  // K + lambda n W^-1 (+ jitter I after fallback)
  Eigen::LDLT<Matrix> ldlt;
  double jitter = 0.0;
};

void check_fit_inputs(const Matrix& K, const Vector& targets, double lambda,
                      const Vector& weights) {
  if (K.rows() != K.cols()) throw DataError("fit: K must be square");
  if (targets.size() != K.rows()) throw DataError("fit: target length != n");
  if (weights.size() != K.rows()) throw DataError("fit: weight length != n");
  if (lambda < 0.0) throw DataError("fit: lambda must be >= 0");
  for (Index i = 0; i < weights.size(); ++i)
    if (!std::isfinite(weights(i)) || !(weights(i) > 0.0))
      throw DataError("fit: weights must be strictly positive and finite");
}

WeightedSystem factorize(const Matrix& K, double lambda, const Vector& weights) {
  const Index n = K.rows();
  WeightedSystem sys;
  sys.M = K;
  if (lambda > 0.0)
    sys.M.diagonal() += (lambda * static_cast<double>(n)) * weights.cwiseInverse();

  sys.ldlt.compute(sys.M);
  if (sys.ldlt.info() == Eigen::Success) return sys;

  // Near-singular interpolation cells: retry once with a trace-scaled jitter.
  sys.jitter = 1e-10 * K.trace() / static_cast<double>(n);
  sys.M.diagonal().array() += sys.jitter;
  sys.ldlt.compute(sys.M);
  if (sys.ldlt.info() != Eigen::Success)
    throw SingularSystemError("fit: factorization failed even with jitter");
  return sys;
}

Vector solve_checked(const WeightedSystem& sys, const Vector& rhs, double lambda) {
  Vector c = sys.ldlt.solve(rhs);
  if (!c.allFinite()) {
    if (lambda == 0.0)
      throw SingularSystemError("fit: singular kernel matrix at lambda = 0");
    throw SingularSystemError("fit: solve produced non-finite coefficients");
  }
  return c;
}

}  // namespace

FittedEstimator fit(const Matrix& K, const Vector& targets, double lambda,
                    const Vector& weights) {
  check_fit_inputs(K, targets, lambda, weights);
  WeightedSystem sys = factorize(K, lambda, weights);
  FittedEstimator est;
  est.coefficients = solve_checked(sys, targets, lambda);
  est.lambda = lambda;
  est.weights = weights;
  est.jitter = sys.jitter;

  if (lambda == 0.0) {
    const double rel = (sys.M * est.coefficients - targets).norm() /
                       std::max(targets.norm(), 1e-300);
    if (rel > 1e-6)
      throw SingularSystemError("fit: kernel matrix numerically singular at lambda = 0");
  }
  return est;
}

FittedEstimator fit_noiseless(const Matrix& K, const Vector& f_rho_train, double lambda,
                              const Vector& weights) {
  return fit(K, f_rho_train, lambda, weights);
}

Vector predict(const FittedEstimator& est, const Matrix& cross) {
  if (cross.cols() != est.n()) throw DataError("predict: cross column count != n");
  return cross * est.coefficients;
}

double fit_residual(const Matrix& K, const FittedEstimator& est, const Vector& targets) {
  const Index n = K.rows();
  Vector resid = K * est.coefficients - targets;
  resid += (est.lambda * static_cast<double>(n)) *
           est.weights.cwiseInverse().cwiseProduct(est.coefficients);
  if (est.jitter > 0.0) resid += est.jitter * est.coefficients;
  return resid.norm() / std::max(targets.norm(), 1e-300);
}

BiasVarianceReport decompose(const Matrix& K, const Matrix& cross_test,
                             const Vector& f_rho_train, const Vector& f_rho_test,
                             double lambda, const Vector& weights, double sigma_eps) {
  check_fit_inputs(K, f_rho_train, lambda, weights);
  if (sigma_eps < 0.0) throw DataError("decompose: sigma_eps must be >= 0");
  if (cross_test.cols() != K.rows()) throw DataError("decompose: cross column count != n");
  if (f_rho_test.size() != cross_test.rows())
    throw DataError("decompose: f_rho_test length != test rows");

  const WeightedSystem sys = factorize(K, lambda, weights);
  const Index m = cross_test.rows();

  const Vector c0 = solve_checked(sys, f_rho_train, lambda);
  BiasVarianceReport report;
  report.n_test = m;
  report.bias_sq = (cross_test * c0 - f_rho_test).squaredNorm() / static_cast<double>(m);

  if (sigma_eps > 0.0) {
    const Matrix S = sys.ldlt.solve(cross_test.transpose());  // n x m
    report.variance = sigma_eps * sigma_eps * S.squaredNorm() / static_cast<double>(m);
  }
  report.excess_risk = report.bias_sq + report.variance;
  return report;
}

McRiskEstimate excess_risk_mc_detail(const Matrix& K, const Matrix& cross_test,
                                     const Vector& f_rho_train, const Vector& f_rho_test,
                                     double lambda, const Vector& weights, double sigma_eps,
                                     int n_draws, Rng& rng) {
  if (n_draws < 1) throw DataError("excess_risk_mc: n_draws must be >= 1");
  check_fit_inputs(K, f_rho_train, lambda, weights);
  const WeightedSystem sys = factorize(K, lambda, weights);
  const Index n = K.rows();
  const Index m = cross_test.rows();

  double sum = 0.0, sum_sq = 0.0;
  Vector y(n);
  for (int t = 0; t < n_draws; ++t) {
    for (Index i = 0; i < n; ++i) y(i) = f_rho_train(i) + sigma_eps * rng.normal();
    const Vector c = solve_checked(sys, y, lambda);
    const double err =
        (cross_test * c - f_rho_test).squaredNorm() / static_cast<double>(m);
    sum += err;
    sum_sq += err * err;
  }
  McRiskEstimate mc;
  mc.draws = n_draws;
  mc.mean = sum / n_draws;
  if (n_draws > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / n_draws) / (n_draws - 1));
    mc.std_error = std::sqrt(var / n_draws);
  }
  return mc;
}

double excess_risk_mc(const Matrix& K, const Matrix& cross_test, const Vector& f_rho_train,
                      const Vector& f_rho_test, double lambda, const Vector& weights,
                      double sigma_eps, int n_draws, Rng& rng) {
  return excess_risk_mc_detail(K, cross_test, f_rho_train, f_rho_test, lambda, weights,
                               sigma_eps, n_draws, rng)
      .mean;
}

}  // namespace kshift
