#include <doctest.h>

#include <cmath>
#include <limits>

#include "kshift/kernel.hpp"
#include "kshift/rng.hpp"
#include "kshift/spectral.hpp"

using namespace kshift;

namespace {

Matrix random_rows(std::uint64_t seed, Index n, Index d) {
  Rng rng(seed);
  Matrix X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) X(i, j) = rng.normal();
  return X;
}

}  // namespace

TEST_SUITE("kernel profiles") {
  TEST_CASE("closed-form values at zero") {
    const auto poly = eval_profile(KernelSpec::inner_polynomial(5), 0.0);
    CHECK(poly.h == 1.0);
    CHECK(poly.h1 == 5.0);
    CHECK(poly.h2 == 20.0);

    const auto gauss = eval_profile(KernelSpec::radial_gaussian(), 0.0);
    CHECK(gauss.h == 1.0);
    CHECK(gauss.h1 == 1.0);
    CHECK(gauss.h2 == 1.0);

    const auto expo = eval_profile(KernelSpec::inner_exponential(), 0.0);
    CHECK(expo.h == 1.0);
    CHECK(expo.h1 == 2.0);
    CHECK(expo.h2 == 4.0);
  }

  TEST_CASE("derivatives match central finite differences on [-2, 1]") {
    const double step = 1e-6;
    for (const auto& spec : {KernelSpec::inner_polynomial(5), KernelSpec::inner_polynomial(2),
                             KernelSpec::inner_exponential(), KernelSpec::radial_gaussian()}) {
      for (int i = 0; i <= 30; ++i) {
        const double u = -2.0 + 3.0 * i / 30.0;
        const auto v = eval_profile(spec, u);
        const double h_plus = eval_profile(spec, u + step).h;
        const double h_minus = eval_profile(spec, u - step).h;
        const double fd1 = (h_plus - h_minus) / (2.0 * step);
        const double fd2 = (h_plus - 2.0 * v.h + h_minus) / (step * step);
        CHECK(v.h1 == doctest::Approx(fd1).epsilon(1e-5));
        // Second differences lose about half the mantissa; looser tolerance.
        CHECK(v.h2 == doctest::Approx(fd2).epsilon(1e-3));
      }
    }
  }

  TEST_CASE("custom profile requires all derivatives") {
    auto spec = KernelSpec::custom(KernelFamily::InnerProduct,
                                   [](double u) { return 1.0 + u; }, nullptr, nullptr);
    CHECK_THROWS_AS(eval_profile(spec, 0.0), ConfigError);
  }

  TEST_CASE("curvature check accepts built-ins and rejects affine profiles") {
    CHECK(check_profile(KernelSpec::inner_polynomial(5), -0.5, 0.5).ok);
    CHECK(check_profile(KernelSpec::radial_gaussian(), -2.0, 0.0).ok);
    const auto affine = KernelSpec::custom(
        KernelFamily::InnerProduct, [](double u) { return 1.0 + u; },
        [](double) { return 1.0; }, [](double) { return 0.0; });
    CHECK_FALSE(check_profile(affine, -0.5, 0.5).ok);
  }
}

TEST_SUITE("gram assembly") {
  TEST_CASE("radial diagonal is h(0) = 1") {
    const Matrix X = random_rows(11, 17, 9);
    const Matrix K = gram(KernelSpec::radial_gaussian(), X);
    for (Index i = 0; i < K.rows(); ++i) CHECK(K(i, i) == 1.0);
  }

  TEST_CASE("hand-computed polynomial entries") {
    Matrix X(2, 2);
    X << 1, 1, 1, -1;
    const Matrix K2 = gram(KernelSpec::inner_polynomial(2), X);
    CHECK(K2(0, 1) == doctest::Approx(1.0).epsilon(1e-15));  // (1 + 0)^2
    const Matrix K5 = gram(KernelSpec::inner_polynomial(5), X);
    CHECK(K5(0, 0) == doctest::Approx(32.0).epsilon(1e-15));  // (1 + 1)^5
  }

  TEST_CASE("output is exactly symmetric") {
    const Matrix X = random_rows(3, 23, 7);
    for (const auto& spec : {KernelSpec::inner_polynomial(5), KernelSpec::radial_gaussian()}) {
      const Matrix K = gram(spec, X);
      CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("PSD up to -1e-10 |K| on generic data") {
    const Matrix X = random_rows(5, 40, 25);
    for (const auto& spec : {KernelSpec::inner_polynomial(5), KernelSpec::inner_exponential(),
                             KernelSpec::radial_gaussian()}) {
      const Matrix K = gram(spec, X);
      const Vector ev = sym_eigenvalues(K);
      CHECK(ev(0) >= -1e-10 * ev(ev.size() - 1));
    }
  }

  TEST_CASE("non-finite input is a data error") {
    Matrix X = random_rows(7, 4, 3);
    X(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(gram(KernelSpec::inner_polynomial(5), X), DataError);
  }

  TEST_CASE("kappa is the max diagonal") {
    const Matrix X = random_rows(31, 9, 4);
    const Matrix K = gram(KernelSpec::inner_polynomial(3), X);
    CHECK(gram_kappa(K) == K.diagonal().maxCoeff());
  }
}

TEST_SUITE("cross gram") {
  TEST_CASE("test == train reproduces the gram matrix") {
    const Matrix X = random_rows(13, 12, 6);
    for (const auto& spec : {KernelSpec::inner_polynomial(5), KernelSpec::radial_gaussian()}) {
      const Matrix K = gram(spec, X);
      const Matrix C = cross_gram(spec, X, X);
      CHECK((C - K).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("radial block transposes under role exchange") {
    const Matrix A = random_rows(17, 10, 5);
    const Matrix B = random_rows(19, 8, 5);
    const auto spec = KernelSpec::radial_gaussian();
    const Matrix C1 = cross_gram(spec, A, B);  // 8 x 10
    const Matrix C2 = cross_gram(spec, B, A);  // 10 x 8
    CHECK((C1 - C2.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  }

  TEST_CASE("single pair matches the gram entry") {
    Matrix X(1, 2), T(1, 2);
    X << 1, 1;
    T << 1, -1;
    const auto spec = KernelSpec::inner_polynomial(2);
    Matrix both(2, 2);
    both << 1, 1, 1, -1;
    CHECK(cross_gram(spec, X, T)(0, 0) ==
          doctest::Approx(gram(spec, both)(0, 1)).epsilon(1e-15));
  }

  TEST_CASE("dimension mismatch is a data error") {
    CHECK_THROWS_AS(cross_gram(KernelSpec::inner_polynomial(5), random_rows(1, 4, 3),
                               random_rows(2, 4, 5)),
                    DataError);
  }
}

TEST_SUITE("spectral helpers") {
  TEST_CASE("power iteration agrees with the dense eigensolver") {
    const Matrix X = random_rows(29, 60, 60);
    const Matrix S = 0.5 * (X + X.transpose());
    const double dense = spectral_norm_sym(S);
    const double power = power_iteration_norm(S, 1e-10, 2000);
    CHECK(power == doctest::Approx(dense).epsilon(1e-6));
  }
}
