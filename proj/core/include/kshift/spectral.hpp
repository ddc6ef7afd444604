#pragma once

#include "kshift/kernel.hpp"

namespace kshift {

/// Eigenvalues of a symmetric matrix, ascending (Eigen's convention).
Vector sym_eigenvalues(const Matrix& S);

/// Spectral norm of a symmetric matrix. Uses a dense symmetric
/// eigendecomposition up to 2048 rows and power iteration (relative
/// tolerance 1e-6, at most 500 iterations) beyond that.
double spectral_norm_sym(const Matrix& S);

/// Power iteration on a symmetric matrix; exposed for testing against the
/// dense path.
double power_iteration_norm(const Matrix& S, double tol = 1e-6, int max_iters = 500);

}  // namespace kshift
