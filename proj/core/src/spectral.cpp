#include "kshift/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "kshift/rng.hpp"

namespace kshift {

Vector sym_eigenvalues(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ModelError("sym_eigenvalues: eigensolver failed");
  return es.eigenvalues();
}

double power_iteration_norm(const Matrix& S, double tol, int max_iters) {
  const Index n = S.rows();
  if (n == 0) return 0.0;
  Rng rng(0x5eedULL);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = S.selfadjointView<Eigen::Lower>() * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double next = norm;  // |S v| with unit v estimates |lambda_max|
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
    v.swap(w);
  }
  return lambda;
}

double spectral_norm_sym(const Matrix& S) {
  if (S.rows() <= 2048) {
    const Vector ev = sym_eigenvalues(S);
    if (ev.size() == 0) return 0.0;
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  return power_iteration_norm(S);
}

}  // namespace kshift
