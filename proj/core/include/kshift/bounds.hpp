#pragma once

#include "kshift/linearized.hpp"

namespace kshift {

/// Capacity of a spectrum: N(K, b) = sum_i lambda_i / (b + lambda_i)^2.
double capacity(const Vector& spectrum, double b);

/// Capacity of the (generally nonsymmetric) product K W with W a positive
/// diagonal: evaluated on the similar symmetric matrix W^{1/2} K W^{1/2},
/// which has the same spectrum. Throws ModelError if that matrix has an
/// eigenvalue below -1e-8 * |M|.
double capacity_of_product(const Matrix& K_sym, const Vector& weights_diag, double b);

/// Effective dimension sum_i lambda_i / (lambda_i + lam) over an empirical
/// operator spectrum; tiny negative eigenvalue estimates are clamped to 0.
double effective_dimension(const Vector& spectrum, double lam);

/// Distribution-shift diagnostics between two diagonal covariances:
///   trace_ratio = Tr(Sigma_p^{-1} Sigma_q) / d,
///   c_pq        = max(0, log_d trace_ratio),
///   theta_mu    = 1/2 - 2/(8 + m_mu),
///   admissible  = c_pq < 2 theta_q - 1/2.
struct ShiftDiagnostics {
  double tau_p = 0.0;
  double tau_q = 0.0;
  double trace_ratio = 0.0;
  double c_pq = 0.0;
  double theta_p = 0.0;
  double theta_q = 0.0;
  int m_p = 0;
  int m_q = 0;
  Index d = 0;
  bool admissible = false;
};

ShiftDiagnostics shift_diagnostics(const Vector& sigma_p, const Vector& sigma_q, int m_p,
                                   int m_q);

struct VarianceBound {
  double dominated = 0.0;       // capacity-controlled main term
  double residual = 0.0;        // dimension-decay remainder
  double capacity_value = 0.0;  // N(XX^T/d + (lambda n / beta) W^-1; gamma/beta)
};

/// High-probability variance estimate:
///   dominated = (8 sigma_eps^2 max(Sigma_q) / d)
///               * N(XX^T/d + (lambda n/beta) W^-1; gamma/beta)
///   residual  = (8 sigma_eps^2 / gamma^2) d^{-(4 theta_q - 1 - 2 c_pq)}
///               * (log d)^{4(1+eps_log)}.
/// Requires admissible shift diagnostics.
VarianceBound variance_bound(const Matrix& X_train, const Vector& sigma_q_diag,
                             const LinearizedParams& lin, double lambda,
                             const Vector& weights, double sigma_eps,
                             const ShiftDiagnostics& diag, double eps_log);

struct BiasBound {
  double intrinsic = 0.0;    // Tr(K_lin W) / n
  double reweighting = 0.0;  // lambda- and reweighting-dependent remainder
};

/// Squared-bias estimate under arbitrary regularization. true_weights carries
/// the density ratio w(x_i); used_weights the reweighting actually applied.
///   intrinsic   = Tr(K_lin W) / n
///   reweighting = 4 lambda^2 n Tr((lambda n I + K_lin Wbar)^{-2} K_lin W)
///                 + lambda^2 kappa W_max
///                 + 6 kappa W_max sqrt(log(1/delta) / (2n))
///                 + C d^{-theta_p} (delta^{-1/2} + (log d)^{(1+eps)/2}) W_max.
BiasBound bias_bound_arbitrary(const Matrix& K_lin, const Vector& true_weights,
                               const Vector& used_weights, double lambda, double kappa,
                               double w_max, double delta, const ShiftDiagnostics& diag,
                               double c_tilde, double eps_log);

/// Leading-order squared-bias estimate when reweighting by the ratio itself:
///   Tr(K_lin W)/n + lambda^2 n N(K_lin W, n lambda).
double bias_bound_ratio(const Matrix& K_lin, const Vector& ratio_weights, double lambda,
                        Index n);

/// Constants of the regularization schedule lambda = C n^{-c}.
struct ScheduleParams {
  double r_bar = 0.5;       // source exponent, in [1/2, 1)
  double s_qbar = 1.0;      // capacity exponent, in [0, 1]
  double t_wbar = 0.0;      // ratio-tail exponent, in [0, 1]
  double c_w1 = 0.0;        // <= 2 c_w2
  double c_w2 = 0.0;        // <= 1/4
  double W_wbar = 1.0;
  double sigma_wbar = 1.0;
  double E_qbar = 1.0;
  double zeta = 1.0;        // n/d limit
  double delta = 0.05;
  double c_H = 0.0;
  double C_H = 1.0;
};

struct LambdaSchedule {
  double c_lambda = 0.0;
  double C_lambda = 0.0;
  double lambda = 0.0;
};

/// Schedule exponent and the smallest admissible constant:
///   c_lambda = (1 - 4 c_w2) / (2 r_bar + A),  A = t + (1 - t) s,
///   C_lambda^{1+A} = 64 (W + sigma^2) E^{2(1-t)} (2/zeta)^{2 c_w2} log^2(6/delta).
LambdaSchedule lambda_schedule(const ScheduleParams& p, Index n);

/// Theoretical quantities attached to one experiment cell.
struct BoundReport {
  double variance_dominated = 0.0;
  double variance_residual = 0.0;
  double bias_intrinsic = 0.0;
  double bias_reweighting = 0.0;
  double capacity_value = 0.0;
  double lambda_used = 0.0;
};

}  // namespace kshift
