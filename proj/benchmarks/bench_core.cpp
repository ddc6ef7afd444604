#include <benchmark/benchmark.h>

#include "kshift/bounds.hpp"
#include "kshift/estimator.hpp"
#include "kshift/linearized.hpp"
#include "kshift/spectral.hpp"
#include "kshift/synthdata.hpp"

using namespace kshift;

namespace {

struct Cell {
  CovariancePair pair;
  Matrix X;
  Matrix X_test;
  Vector f_train, f_test, weights;
  Matrix K, cross;
};

Cell make_cell(Index n, Index d, Index m) {
  Cell cell;
  Rng rng(42);
  cell.pair = make_covariance_pair(d, 0.5, false, rng);
  cell.X = sample_design(rng, n, cell.pair.sigma_p);
  cell.X_test = sample_design(rng, m, cell.pair.sigma_q);
  cell.f_train = target_values(cell.X);
  cell.f_test = target_values(cell.X_test);
  cell.weights =
      weight_vector(WeightingScheme::truncated_ratio(10.0), cell.pair, cell.X);
  cell.K = gram(KernelSpec::inner_polynomial(5), cell.X);
  cell.cross = cross_gram(KernelSpec::inner_polynomial(5), cell.X, cell.X_test);
  return cell;
}

}  // namespace

static void BM_Gram(benchmark::State& state) {
  const Index n = state.range(0), d = 200;
  Rng rng(1);
  const auto pair = make_covariance_pair(d, 0.5, false, rng);
  const Matrix X = sample_design(rng, n, pair.sigma_p);
  const auto spec = KernelSpec::inner_polynomial(5);
  for (auto _ : state) {
    Matrix K = gram(spec, X);
    benchmark::DoNotOptimize(K.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(100, 800)->Complexity();

static void BM_GramLinearized(benchmark::State& state) {
  const Index n = state.range(0), d = 200;
  Rng rng(2);
  const auto pair = make_covariance_pair(d, 0.5, false, rng);
  const Matrix X = sample_design(rng, n, pair.sigma_p);
  const auto lin = linearize_params(KernelSpec::inner_polynomial(5), pair.sigma_p);
  const Vector psi = psi_vector(X, lin.tau);
  for (auto _ : state) {
    Matrix K = gram_linearized(lin, X, psi);
    benchmark::DoNotOptimize(K.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_GramLinearized)->RangeMultiplier(2)->Range(100, 800)->Complexity();

static void BM_FitSolve(benchmark::State& state) {
  const Index n = state.range(0);
  const Cell cell = make_cell(n, 200, 100);
  Rng rng(3);
  const Vector y =
      cell.f_train + Vector::NullaryExpr(n, [&](Index) { return rng.normal(); });
  for (auto _ : state) {
    auto est = fit(cell.K, y, 1e-3, cell.weights);
    benchmark::DoNotOptimize(est.coefficients.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_FitSolve)->RangeMultiplier(2)->Range(100, 800)->Complexity();

static void BM_Decompose(benchmark::State& state) {
  const Index n = state.range(0);
  const Cell cell = make_cell(n, 200, 500);
  for (auto _ : state) {
    auto report = decompose(cell.K, cell.cross, cell.f_train, cell.f_test, 1e-3,
                            cell.weights, 1.0);
    benchmark::DoNotOptimize(report.excess_risk);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Decompose)->RangeMultiplier(2)->Range(100, 400)->Complexity();

static void BM_SpectralNormGap(benchmark::State& state) {
  const Index n = state.range(0);
  const Cell cell = make_cell(n, 200, 50);
  const auto lin = linearize_params(KernelSpec::inner_polynomial(5), cell.pair.sigma_p);
  const Vector psi = psi_vector(cell.X, lin.tau);
  const Matrix K_lin = gram_linearized(lin, cell.X, psi);
  const Matrix diff = cell.K - K_lin;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_norm_sym(diff));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_SpectralNormGap)->RangeMultiplier(2)->Range(100, 400)->Complexity();

static void BM_VarianceBound(benchmark::State& state) {
  const Index n = state.range(0);
  const Cell cell = make_cell(n, 200, 50);
  const auto lin = linearize_params(KernelSpec::inner_polynomial(5), cell.pair.sigma_p);
  const auto diag = shift_diagnostics(cell.pair.sigma_p, cell.pair.sigma_q, 8, 8);
  for (auto _ : state) {
    auto vb = variance_bound(cell.X, cell.pair.sigma_q, lin, 1e-3, cell.weights, 1.0,
                             diag, 0.05);
    benchmark::DoNotOptimize(vb.dominated);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_VarianceBound)->RangeMultiplier(2)->Range(100, 400)->Complexity();

BENCHMARK_MAIN();
