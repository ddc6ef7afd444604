#pragma once

#include <Eigen/Dense>
#include <functional>

#include "kshift/errors.hpp"

namespace kshift {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class KernelFamily { InnerProduct, Radial };

enum class ProfileKind { Polynomial, Exponential, Gaussian, Custom };

using ScalarMap = std::function<double(double)>;

/// Scalar kernel profile h and the family it is applied through:
///   InnerProduct:  K(x, x') = h(<x, x'> / d)
///   Radial:        K(x, x') = h(-|x - x'|^2 / d)
/// Built-in profiles carry closed-form derivatives:
///   Polynomial(k): h(u) = (1 + u)^k
///   Exponential:   h(u) = exp(2u)
///   Gaussian:      h(u) = exp(u)
/// Custom profiles must supply h, h', h'' explicitly; there is no automatic
/// differentiation.
struct KernelSpec {
  KernelFamily family = KernelFamily::InnerProduct;
  ProfileKind profile = ProfileKind::Polynomial;
  int degree = 5;  // Polynomial only
  ScalarMap h, h1, h2;  // Custom only

  static KernelSpec inner_polynomial(int degree);
  static KernelSpec inner_exponential();
  static KernelSpec radial_gaussian();
  static KernelSpec custom(KernelFamily family, ScalarMap h, ScalarMap h1, ScalarMap h2);
};

struct ProfileValue {
  double h;   // h(u)
  double h1;  // h'(u)
  double h2;  // h''(u)
};

/// Closed-form profile evaluation. Throws ConfigError if a Custom profile is
/// missing a derivative callback.
ProfileValue eval_profile(const KernelSpec& spec, double u);

struct ProfileCheck {
  bool ok;
  double min_h, min_h1, min_h2, max_h2;
};

/// Samples h on a grid over [lo, hi] and checks the curvature constraints
/// h >= 0, h' > 0, 0 < h'' <= bound that the linearization relies on.
ProfileCheck check_profile(const KernelSpec& spec, double lo, double hi, int steps = 201);

/// Dense Gram matrix K(X, X); rows of X are samples. Output is exactly
/// symmetric (assembled from the upper triangle).
Matrix gram(const KernelSpec& spec, const Matrix& X);

/// Cross-kernel block: entry (j, i) = K(x_test_j, x_train_i), m x n.
Matrix cross_gram(const KernelSpec& spec, const Matrix& X_train, const Matrix& X_test);

/// Kernel sup bound kappa as realized on the data: max diagonal entry.
double gram_kappa(const Matrix& gram_matrix);

}  // namespace kshift
