#include <doctest.h>

#include <cmath>

#include "kshift/estimator.hpp"
#include "kshift/kernel.hpp"
#include "kshift/rng.hpp"

using namespace kshift;

namespace {

Matrix random_rows(std::uint64_t seed, Index n, Index d) {
  Rng rng(seed);
  Matrix X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) X(i, j) = rng.normal();
  return X;
}

// Random well-conditioned weighted system on polynomial-kernel data.
struct SmallProblem {
  Matrix K;
  Vector y;
  Vector w;
};

SmallProblem make_problem(std::uint64_t seed, Index n = 24, Index d = 10) {
  SmallProblem p;
  const Matrix X = random_rows(seed, n, d);
  p.K = gram(KernelSpec::inner_polynomial(3), X);
  Rng rng(seed ^ 0xabcdef);
  p.y = Vector::NullaryExpr(n, [&](Index) { return rng.normal(); });
  p.w = Vector::NullaryExpr(n, [&](Index) { return 0.5 + rng.uniform(); });
  return p;
}

}  // namespace

TEST_SUITE("weighted ridge solver") {
  TEST_CASE("scalar system solves by hand") {
    Matrix K(1, 1);
    K << 2.0;
    Vector y = Vector::Constant(1, 3.0);
    Vector w = Vector::Ones(1);
    const auto est = fit(K, y, 1.0, w);
    CHECK(est.coefficients(0) == doctest::Approx(1.0).epsilon(1e-15));  // 3/(2+1)
    CHECK(predict(est, K)(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(est.jitter == 0.0);
  }

  TEST_CASE("lambda = 0 interpolates the labels") {
    const auto p = make_problem(21);
    const auto est = fit(p.K, p.y, 0.0, p.w);
    const Vector preds = predict(est, p.K);
    CHECK((preds - p.y).cwiseAbs().maxCoeff() <= 1e-6 * p.y.cwiseAbs().maxCoeff());
  }

  TEST_CASE("optimality residual below 1e-8 on random systems") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto p = make_problem(100 + seed);
      const auto est = fit(p.K, p.y, 0.05, p.w);
      CHECK(fit_residual(p.K, est, p.y) <= 1e-8);
    }
  }

  TEST_CASE("joint scaling of lambda and weights leaves predictions unchanged") {
    const auto p = make_problem(33);
    const Matrix cross = p.K.topRows(7);
    for (double c : {0.1, 10.0}) {
      const auto base = fit(p.K, p.y, 0.3, p.w);
      const auto scaled = fit(p.K, p.y, c * 0.3, (c * p.w).eval());
      const Vector a = predict(base, cross);
      const Vector b = predict(scaled, cross);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("nonpositive weights are rejected") {
    auto p = make_problem(55);
    p.w(3) = 0.0;
    CHECK_THROWS_AS(fit(p.K, p.y, 0.1, p.w), DataError);
    p.w(3) = -1.0;
    CHECK_THROWS_AS(fit(p.K, p.y, 0.1, p.w), DataError);
  }

  TEST_CASE("singular kernel at lambda = 0 raises the singularity error") {
    // Duplicate rows make the polynomial Gram exactly rank-deficient.
    Matrix X = random_rows(77, 6, 4);
    X.row(5) = X.row(0);
    const Matrix K = gram(KernelSpec::inner_polynomial(2), X);
    Rng rng(78);
    const Vector y = Vector::NullaryExpr(6, [&](Index) { return rng.normal(); });
    CHECK_THROWS_AS(fit(K, y, 0.0, Vector::Ones(6)), SingularSystemError);
  }

  TEST_CASE("noiseless fit coincides with fit when y = f_rho") {
    const auto p = make_problem(91);
    const auto a = fit(p.K, p.y, 0.2, p.w);
    const auto b = fit_noiseless(p.K, p.y, 0.2, p.w);
    CHECK((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("zero targets give zero coefficients") {
    const auto p = make_problem(101);
    const auto est = fit_noiseless(p.K, Vector::Zero(p.K.rows()), 0.4, p.w);
    CHECK(est.coefficients.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("prediction mismatches are data errors") {
    const auto p = make_problem(111);
    const auto est = fit(p.K, p.y, 0.1, p.w);
    CHECK_THROWS_AS(predict(est, Matrix::Zero(3, p.K.rows() + 1)), DataError);
    const Vector zero_row = predict(est, Matrix::Zero(1, p.K.rows())).transpose();
    CHECK(zero_row(0) == 0.0);
  }
}

TEST_SUITE("bias-variance decomposition") {
  TEST_CASE("scalar case by hand: bias 1, variance 4/9") {
    Matrix K(1, 1), cross(1, 1);
    K << 2.0;
    cross << 2.0;
    const Vector f_train = Vector::Constant(1, 3.0);
    const Vector f_test = Vector::Constant(1, 3.0);
    const auto r = decompose(K, cross, f_train, f_test, 1.0, Vector::Ones(1), 1.0);
    CHECK(r.bias_sq == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.variance == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    CHECK(r.excess_risk == doctest::Approx(1.0 + 4.0 / 9.0).epsilon(1e-14));
  }

  TEST_CASE("zero noise has zero variance; zero target has zero bias") {
    const auto p = make_problem(121);
    const Matrix cross = p.K.topRows(9);
    const Vector f_test = p.y.head(9);
    const auto a = decompose(p.K, cross, p.y, f_test, 0.1, p.w, 0.0);
    CHECK(a.variance == 0.0);
    const auto b = decompose(p.K, cross, Vector::Zero(p.K.rows()),
                             Vector::Zero(9), 0.1, p.w, 1.0);
    CHECK(b.bias_sq == 0.0);
  }

  TEST_CASE("variance is nonincreasing in lambda over four decades") {
    const auto p = make_problem(131);
    const Matrix cross = p.K.topRows(9);
    const Vector f_test = p.y.head(9);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-3, 1e-2, 1e-1, 1e0, 1e1}) {
      const auto r = decompose(p.K, cross, p.y, f_test, lambda, p.w, 1.0);
      CHECK(r.variance <= prev * (1.0 + 1e-12));
      prev = r.variance;
    }
  }

  TEST_CASE("negative noise sd is a data error") {
    const auto p = make_problem(141);
    CHECK_THROWS_AS(
        decompose(p.K, p.K.topRows(2), p.y, p.y.head(2), 0.1, p.w, -1.0), DataError);
  }
}

TEST_SUITE("monte-carlo excess risk") {
  TEST_CASE("zero noise equals the bias exactly for any draw count") {
    const auto p = make_problem(151);
    const Matrix cross = p.K.topRows(5);
    const Vector f_test = 0.7 * p.y.head(5);
    Rng rng(1);
    const double mc =
        excess_risk_mc(p.K, cross, p.y, f_test, 0.1, p.w, 0.0, 7, rng);
    const auto r = decompose(p.K, cross, p.y, f_test, 0.1, p.w, 0.0);
    CHECK(mc == doctest::Approx(r.bias_sq).epsilon(1e-14));
  }

  TEST_CASE("fixed seed is deterministic") {
    const auto p = make_problem(161);
    const Matrix cross = p.K.topRows(5);
    const Vector f_test = p.y.head(5);
    Rng r1(42), r2(42);
    const double a = excess_risk_mc(p.K, cross, p.y, f_test, 0.2, p.w, 1.0, 25, r1);
    const double b = excess_risk_mc(p.K, cross, p.y, f_test, 0.2, p.w, 1.0, 25, r2);
    CHECK(a == b);
  }

  TEST_CASE("scalar case: 200 draws land within 3 standard errors of 1 + 4/9") {
    Matrix K(1, 1), cross(1, 1);
    K << 2.0;
    cross << 2.0;
    const Vector f = Vector::Constant(1, 3.0);
    Rng rng(7);
    const auto mc =
        excess_risk_mc_detail(K, cross, f, f, 1.0, Vector::Ones(1), 1.0, 200, rng);
    CHECK(std::abs(mc.mean - (1.0 + 4.0 / 9.0)) <= 3.0 * mc.std_error);
  }
}
