#include "kshift/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kshift {

KernelSpec KernelSpec::inner_polynomial(int degree) {
  if (degree < 1) throw ConfigError("polynomial degree must be a positive integer");
  KernelSpec s;
  s.family = KernelFamily::InnerProduct;
  s.profile = ProfileKind::Polynomial;
  s.degree = degree;
  return s;
}

KernelSpec KernelSpec::inner_exponential() {
  KernelSpec s;
  s.family = KernelFamily::InnerProduct;
  s.profile = ProfileKind::Exponential;
  return s;
}

KernelSpec KernelSpec::radial_gaussian() {
  KernelSpec s;
  s.family = KernelFamily::Radial;
  s.profile = ProfileKind::Gaussian;
  return s;
}

KernelSpec KernelSpec::custom(KernelFamily family, ScalarMap h, ScalarMap h1, ScalarMap h2) {
  KernelSpec s;
  s.family = family;
  s.profile = ProfileKind::Custom;
  s.h = std::move(h);
  s.h1 = std::move(h1);
  s.h2 = std::move(h2);
  return s;
}

namespace {

// (1+u)^k by repeated multiplication; k is small in practice.
double ipow1p(double u, int k) {
  double base = 1.0 + u;
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= base;
  return out;
}

}  // namespace

ProfileValue eval_profile(const KernelSpec& spec, double u) {
  switch (spec.profile) {
    case ProfileKind::Polynomial: {
      const int k = spec.degree;
      const double h = ipow1p(u, k);
      const double h1 = k * ipow1p(u, k - 1);
      const double h2 = (k >= 2) ? static_cast<double>(k) * (k - 1) * ipow1p(u, k - 2) : 0.0;
      return {h, h1, h2};
    }
    case ProfileKind::Exponential: {
      const double e = std::exp(2.0 * u);
      return {e, 2.0 * e, 4.0 * e};
    }
    case ProfileKind::Gaussian: {
      const double e = std::exp(u);
      return {e, e, e};
    }
    case ProfileKind::Custom: {
      if (!spec.h || !spec.h1 || !spec.h2)
        throw ConfigError("custom profile requires h, h' and h'' callbacks");
      return {spec.h(u), spec.h1(u), spec.h2(u)};
    }
  }
  throw ConfigError("unknown profile kind");
}

ProfileCheck check_profile(const KernelSpec& spec, double lo, double hi, int steps) {
  if (steps < 2) throw ConfigError("check_profile: need at least 2 grid points");
  ProfileCheck out{true, std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < steps; ++i) {
    const double u = lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
    const ProfileValue v = eval_profile(spec, u);
    out.min_h = std::min(out.min_h, v.h);
    out.min_h1 = std::min(out.min_h1, v.h1);
    out.min_h2 = std::min(out.min_h2, v.h2);
    out.max_h2 = std::max(out.max_h2, v.h2);
    if (!std::isfinite(v.h) || !std::isfinite(v.h1) || !std::isfinite(v.h2)) out.ok = false;
  }
  if (out.min_h < 0.0 || out.min_h1 <= 0.0 || out.min_h2 <= 0.0) out.ok = false;
  return out;
}

namespace {

double profile_only(const KernelSpec& spec, double u) {
  switch (spec.profile) {
    case ProfileKind::Polynomial:
      return ipow1p(u, spec.degree);
    case ProfileKind::Exponential:
      return std::exp(2.0 * u);
    case ProfileKind::Gaussian:
      return std::exp(u);
    case ProfileKind::Custom:
      if (!spec.h) throw ConfigError("custom profile requires an h callback");
      return spec.h(u);
  }
  throw ConfigError("unknown profile kind");
}

void require_finite(const Matrix& X, const char* who) {
  if (!X.allFinite()) throw DataError(std::string(who) + ": non-finite input entries");
}

}  // namespace

Matrix gram(const KernelSpec& spec, const Matrix& X) {
  if (X.rows() < 1 || X.cols() < 1) throw DataError("gram: empty design matrix");
  require_finite(X, "gram");
  const Index n = X.rows();
  const double d = static_cast<double>(X.cols());

  // Pairwise inner products through one symmetric rank-k update.
  Matrix G = Matrix::Zero(n, n);
  G.selfadjointView<Eigen::Upper>().rankUpdate(X, 1.0 / d);

  Matrix K(n, n);
  if (spec.family == KernelFamily::InnerProduct) {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i <= j; ++i) K(i, j) = profile_only(spec, G(i, j));
  } else {
    // -|x - x'|^2 / d = 2<x,x'>/d - |x|^2/d - |x'|^2/d
    Vector sq(n);
    for (Index i = 0; i < n; ++i) sq(i) = G(i, i);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i <= j; ++i)
        K(i, j) = profile_only(spec, 2.0 * G(i, j) - sq(i) - sq(j));
  }
  K.triangularView<Eigen::StrictlyLower>() = K.transpose();
  return K;
}

Matrix cross_gram(const KernelSpec& spec, const Matrix& X_train, const Matrix& X_test) {
  if (X_train.cols() != X_test.cols())
    throw DataError("cross_gram: train/test dimension mismatch");
  require_finite(X_train, "cross_gram");
  require_finite(X_test, "cross_gram");
  const double d = static_cast<double>(X_train.cols());
  Matrix U = X_test * X_train.transpose() / d;  // m x n inner products

  if (spec.family == KernelFamily::InnerProduct) {
    for (Index j = 0; j < U.rows(); ++j)
      for (Index i = 0; i < U.cols(); ++i) U(j, i) = profile_only(spec, U(j, i));
    return U;
  }
  const Vector sq_train = X_train.rowwise().squaredNorm() / d;
  const Vector sq_test = X_test.rowwise().squaredNorm() / d;
  for (Index j = 0; j < U.rows(); ++j)
    for (Index i = 0; i < U.cols(); ++i)
      U(j, i) = profile_only(spec, 2.0 * U(j, i) - sq_test(j) - sq_train(i));
  return U;
}

double gram_kappa(const Matrix& gram_matrix) { return gram_matrix.diagonal().maxCoeff(); }

}  // namespace kshift
