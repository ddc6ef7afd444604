#include "kshift/bounds.hpp"

#include <cmath>
#include <sstream>

#include "kshift/spectral.hpp"

namespace kshift {

double capacity(const Vector& spectrum, double b) {
  if (!(b > 0.0)) throw DataError("capacity: b must be > 0");
  double sum = 0.0;
  for (Index i = 0; i < spectrum.size(); ++i) {
    const double lam = spectrum(i);
    const double denom = b + lam;
    sum += lam / (denom * denom);
  }
  return sum;
}

double capacity_of_product(const Matrix& K_sym, const Vector& weights_diag, double b) {
  if (K_sym.rows() != K_sym.cols()) throw DataError("capacity_of_product: K must be square");
  if (weights_diag.size() != K_sym.rows())
    throw DataError("capacity_of_product: weight length != n");
  for (Index i = 0; i < weights_diag.size(); ++i)
    if (!(weights_diag(i) > 0.0))
      throw DataError("capacity_of_product: weights must be strictly positive");

  const Vector root = weights_diag.cwiseSqrt();
  const Matrix sym = root.asDiagonal() * K_sym * root.asDiagonal();
  Vector ev = sym_eigenvalues(sym);
  const double scale = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  if (ev(0) < -1e-8 * scale)
    throw ModelError("capacity_of_product: product is not similar to a PSD matrix");
  for (Index i = 0; i < ev.size(); ++i) ev(i) = std::max(ev(i), 0.0);
  return capacity(ev, b);
}

double effective_dimension(const Vector& spectrum, double lam) {
  if (!(lam > 0.0)) throw DataError("effective_dimension: lambda must be > 0");
  double sum = 0.0;
  for (Index i = 0; i < spectrum.size(); ++i) {
    const double v = std::max(spectrum(i), 0.0);
    sum += v / (v + lam);
  }
  return sum;
}

ShiftDiagnostics shift_diagnostics(const Vector& sigma_p, const Vector& sigma_q, int m_p,
                                   int m_q) {
  if (sigma_p.size() != sigma_q.size())
    throw DataError("shift_diagnostics: dimension mismatch");
  if (sigma_p.size() < 2) throw DataError("shift_diagnostics: requires d >= 2");
  if (m_p < 0 || m_q < 0) throw DataError("shift_diagnostics: moment orders must be >= 0");
  const Index d = sigma_p.size();

  ShiftDiagnostics out;
  out.d = d;
  out.m_p = m_p;
  out.m_q = m_q;
  out.tau_p = sigma_p.sum() / static_cast<double>(d);
  out.tau_q = sigma_q.sum() / static_cast<double>(d);

  double trace = 0.0;
  for (Index i = 0; i < d; ++i) {
    if (!(sigma_p(i) > 0.0) || !(sigma_q(i) > 0.0))
      throw DataError("shift_diagnostics: covariance diagonals must be positive");
    trace += sigma_q(i) / sigma_p(i);
  }
  out.trace_ratio = trace / static_cast<double>(d);
  out.c_pq = std::max(0.0, std::log(out.trace_ratio) / std::log(static_cast<double>(d)));
  out.theta_p = 0.5 - 2.0 / (8.0 + m_p);
  out.theta_q = 0.5 - 2.0 / (8.0 + m_q);
  out.admissible = out.c_pq < 2.0 * out.theta_q - 0.5;
  return out;
}

VarianceBound variance_bound(const Matrix& X_train, const Vector& sigma_q_diag,
                             const LinearizedParams& lin, double lambda,
                             const Vector& weights, double sigma_eps,
                             const ShiftDiagnostics& diag, double eps_log) {
  if (!diag.admissible) {
    std::ostringstream msg;
    msg << "variance_bound: shift diagnostics inadmissible (c_pq = " << diag.c_pq
        << " must be < 2 theta_q - 1/2 = " << 2.0 * diag.theta_q - 0.5
        << "); the kernel approximation residual does not vanish";
    throw ModelError(msg.str());
  }
  const Index n = X_train.rows();
  const double d = static_cast<double>(X_train.cols());
  if (weights.size() != n) throw DataError("variance_bound: weight length != n");

  Matrix M = Matrix::Zero(n, n);
  M.selfadjointView<Eigen::Upper>().rankUpdate(X_train, 1.0 / d);
  M.triangularView<Eigen::StrictlyLower>() = M.transpose();
  if (lambda > 0.0)
    M.diagonal() += (lambda * static_cast<double>(n) / lin.beta) * weights.cwiseInverse();

  VarianceBound out;
  out.capacity_value = capacity(sym_eigenvalues(M), lin.gamma / lin.beta);
  out.dominated =
      8.0 * sigma_eps * sigma_eps * sigma_q_diag.maxCoeff() / d * out.capacity_value;
  const double exponent = 4.0 * diag.theta_q - 1.0 - 2.0 * diag.c_pq;
  out.residual = 8.0 * sigma_eps * sigma_eps / (lin.gamma * lin.gamma) *
                 std::pow(d, -exponent) *
                 std::pow(std::log(d), 4.0 * (1.0 + eps_log));
  return out;
}

BiasBound bias_bound_arbitrary(const Matrix& K_lin, const Vector& true_weights,
                               const Vector& used_weights, double lambda, double kappa,
                               double w_max, double delta, const ShiftDiagnostics& diag,
                               double c_tilde, double eps_log) {
  const Index n = K_lin.rows();
  if (true_weights.size() != n || used_weights.size() != n)
    throw DataError("bias_bound_arbitrary: weight length != n");
  if (lambda < 0.0) throw DataError("bias_bound_arbitrary: lambda must be >= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw DataError("bias_bound_arbitrary: delta must be in (0,1)");

  BiasBound out;
  out.intrinsic =
      K_lin.diagonal().cwiseProduct(true_weights).sum() / static_cast<double>(n);

  // Tr((lambda n I + K Wbar)^{-2} K W) on the similar symmetric matrix
  // G = Wbar^{1/2} K Wbar^{1/2}:  Tr((lambda n I + G)^{-2} G D), D = W / Wbar.
  const Vector root = used_weights.cwiseSqrt();
  const Matrix G = root.asDiagonal() * K_lin * root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  if (es.info() != Eigen::Success)
    throw ModelError("bias_bound_arbitrary: eigendecomposition failed");
  const Vector& ev = es.eigenvalues();
  double trace_term = 0.0;
  if (lambda > 0.0) {
    const Matrix& U = es.eigenvectors();
    const double ln = lambda * static_cast<double>(n);
    Vector f(ev.size());
    for (Index i = 0; i < ev.size(); ++i) {
      const double denom = ln + ev(i);
      f(i) = ev(i) / (denom * denom);
    }
    for (Index j = 0; j < n; ++j) {
      const double diag_j = U.row(j).cwiseAbs2().dot(f);
      trace_term += true_weights(j) / used_weights(j) * diag_j;
    }
  } else if (ev(0) <= 1e-12 * std::abs(ev(ev.size() - 1))) {
    // The trace factor diverges exactly when the regularizer is gone and the
    // product is singular; 0 * inf has no value to report.
    throw ModelError("bias_bound_arbitrary: singular K_lin Wbar at lambda = 0");
  }

  const double d = static_cast<double>(diag.d);
  const double log_d = std::log(d);
  out.reweighting = 4.0 * lambda * lambda * static_cast<double>(n) * trace_term +
                    lambda * lambda * kappa * w_max +
                    6.0 * kappa * w_max *
                        std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n))) +
                    c_tilde * std::pow(d, -diag.theta_p) *
                        (1.0 / std::sqrt(delta) +
                         std::pow(log_d, (1.0 + eps_log) / 2.0)) *
                        w_max;
  return out;
}

double bias_bound_ratio(const Matrix& K_lin, const Vector& ratio_weights, double lambda,
                        Index n) {
  if (!(lambda > 0.0)) throw DataError("bias_bound_ratio: lambda must be > 0");
  if (K_lin.rows() != n || ratio_weights.size() != n)
    throw DataError("bias_bound_ratio: dimension mismatch");
  const double intrinsic =
      K_lin.diagonal().cwiseProduct(ratio_weights).sum() / static_cast<double>(n);
  const double cap =
      capacity_of_product(K_lin, ratio_weights, lambda * static_cast<double>(n));
  return intrinsic + lambda * lambda * static_cast<double>(n) * cap;
}

LambdaSchedule lambda_schedule(const ScheduleParams& p, Index n) {
  if (!(p.r_bar >= 0.5 && p.r_bar < 1.0))
    throw ConfigError("lambda_schedule: r_bar must be in [1/2, 1)");
  if (!(p.s_qbar >= 0.0 && p.s_qbar <= 1.0))
    throw ConfigError("lambda_schedule: s_qbar must be in [0, 1]");
  if (!(p.t_wbar >= 0.0 && p.t_wbar <= 1.0))
    throw ConfigError("lambda_schedule: t_wbar must be in [0, 1]");
  if (p.c_w2 > 0.25 || p.c_w1 > 2.0 * p.c_w2 || p.c_w1 < 0.0 || p.c_w2 < 0.0)
    throw ConfigError("lambda_schedule: ratio-growth constants must satisfy "
                      "0 <= c_w1 <= 2 c_w2 <= 1/2");
  if (!(p.delta > 0.0 && p.delta < 1.0))
    throw ConfigError("lambda_schedule: delta must be in (0, 1)");
  if (!(p.zeta > 0.0)) throw ConfigError("lambda_schedule: zeta must be > 0");
  if (!(p.W_wbar > 0.0 && p.sigma_wbar > 0.0 && p.E_qbar > 0.0))
    throw ConfigError("lambda_schedule: W, sigma, E must be > 0");
  if (n < 1) throw DataError("lambda_schedule: n must be >= 1");

  const double a_bar = p.t_wbar + (1.0 - p.t_wbar) * p.s_qbar;
  const double denom = 2.0 * p.r_bar + a_bar;
  if (!(denom > 0.0)) throw ConfigError("lambda_schedule: exponent denominator <= 0");

  LambdaSchedule out;
  out.c_lambda = (1.0 - 4.0 * p.c_w2) / denom;
  const double rhs = 64.0 * (p.W_wbar + p.sigma_wbar * p.sigma_wbar) *
                     std::pow(p.E_qbar, 2.0 * (1.0 - p.t_wbar)) *
                     std::pow(2.0 / p.zeta, 2.0 * p.c_w2) *
                     std::pow(std::log(6.0 / p.delta), 2.0);
  out.C_lambda = std::pow(rhs, 1.0 / (1.0 + a_bar));
  out.lambda = out.C_lambda * std::pow(static_cast<double>(n), -out.c_lambda);
  return out;
}

}  // namespace kshift
