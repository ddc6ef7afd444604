// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code is the failure count.
//
// `acceptance_tests --full` additionally runs the full-scale d=500 profile
// and applies the shape checks to it (minutes to hours depending on cores).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kshift/bounds.hpp"
#include "kshift/estimator.hpp"
#include "kshift/linearized.hpp"
#include "kshift/plot.hpp"
#include "kshift/sweep.hpp"

using namespace kshift;

namespace {

int g_failures = 0;

class Criterion {
 public:
  explicit Criterion(int id, std::string name) : id_(id), name_(std::move(name)) {
    start_ = std::chrono::steady_clock::now();
  }

  void finish(bool pass, const std::string& detail) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::printf("%s  [%d] %-28s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id_,
                name_.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
  }

 private:
  int id_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

Matrix random_rows(std::uint64_t seed, Index n, Index d) {
  Rng rng(seed);
  Matrix X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) X(i, j) = rng.normal();
  return X;
}

// ---------------------------------------------------------------------------
// 1. capacity oracles
// ---------------------------------------------------------------------------
void criterion_capacity() {
  Criterion c(1, "capacity oracle equivalence");
  double worst_spec = 0.0;
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    Vector spectrum(50);
    for (Index i = 0; i < 50; ++i) spectrum(i) = 10.0 * rng.uniform();
    for (double b = 1e-3; b <= 1e3 + 1e-9; b *= 10.0) {
      // Independent oracle: reverse-order long double accumulation.
      long double acc = 0.0L;
      for (Index i = 49; i >= 0; --i) {
        const long double lam = spectrum(i);
        acc += lam / ((b + lam) * (b + lam));
      }
      const double oracle = static_cast<double>(acc);
      worst_spec = std::max(worst_spec,
                            std::abs(capacity(spectrum, b) - oracle) / oracle);
    }
  }

  double worst_mat = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 20;
    const Matrix A = random_rows(500 + trial, n, n);
    const Matrix K = A * A.transpose() / double(n);
    Vector w(n);
    for (Index i = 0; i < n; ++i) w(i) = 0.2 + 2.0 * rng.uniform();
    const double b = 0.05 * std::pow(10.0, 3.0 * rng.uniform());
    Eigen::EigenSolver<Matrix> es(K * w.asDiagonal());  // brute-force route
    double oracle = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double lam = es.eigenvalues()(i).real();
      oracle += lam / ((b + lam) * (b + lam));
    }
    worst_mat = std::max(worst_mat,
                         std::abs(capacity_of_product(K, w, b) - oracle) / oracle);
  }

  c.finish(worst_spec <= 1e-12 && worst_mat <= 1e-8,
           fmt("spectra rel err %.2e (<=1e-12), product rel err %.2e (<=1e-8)",
               worst_spec, worst_mat));
}

// ---------------------------------------------------------------------------
// 2. solver optimality and interpolation
// ---------------------------------------------------------------------------
void criterion_solver() {
  Criterion c(2, "solver optimality");
  double worst_resid = 0.0, worst_interp = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 40, d = 15;
    const Matrix X = random_rows(900 + trial, n, d);
    const Matrix K = gram(KernelSpec::inner_polynomial(3), X);
    Rng rng(1900 + trial);
    const Vector y = Vector::NullaryExpr(n, [&](Index) { return rng.normal(); });
    const Vector w = Vector::NullaryExpr(n, [&](Index) { return 0.5 + rng.uniform(); });

    const auto est = fit(K, y, 0.05 + rng.uniform(), w);
    worst_resid = std::max(worst_resid, fit_residual(K, est, y));

    const auto interp = fit(K, y, 1e-12, w);
    const double resid_inf =
        (predict(interp, K) - y).cwiseAbs().maxCoeff() / y.cwiseAbs().maxCoeff();
    worst_interp = std::max(worst_interp, resid_inf);
  }
  c.finish(worst_resid <= 1e-8 && worst_interp <= 1e-6,
           fmt("fit residual %.2e (<=1e-8), interpolation residual %.2e (<=1e-6)",
               worst_resid, worst_interp));
}

// ---------------------------------------------------------------------------
// 3. decomposition identity against Monte Carlo
// ---------------------------------------------------------------------------
void criterion_decomposition() {
  Criterion c(3, "decomposition identity");
  int cells = 0, hits = 0;
  const Index d = 50, m = 200;
  for (double a : {0.5, 1.5}) {
    for (int seed = 0; seed < 2; ++seed) {
      DatasetConfig base;
      base.d = d;
      base.n_test = m;
      base.decay_a = a;
      base.sigma_eps = 1.0;
      base.normalize_covariance = false;
      for (Index n : {40, 60, 100}) {
        base.n_train = n;
        base.seed = mix64(3000 + seed, static_cast<std::uint64_t>(n + 1000 * a));
        const DataEnsemble e = gen_dataset(base);
        const Matrix K = gram(KernelSpec::inner_polynomial(5), e.X_train);
        const Matrix cross =
            cross_gram(KernelSpec::inner_polynomial(5), e.X_train, e.X_test);
        const Vector w = weight_vector(WeightingScheme::truncated_ratio(10.0),
                                       e.covariances, e.X_train);
        for (double lambda : {1e-3, 1e-1}) {
          const auto bv = decompose(K, cross, e.f_rho_train, e.f_rho_test, lambda, w,
                                    base.sigma_eps);
          Rng mc_rng(mix64(base.seed, 99));
          const auto mc =
              excess_risk_mc_detail(K, cross, e.f_rho_train, e.f_rho_test, lambda, w,
                                    base.sigma_eps, 200, mc_rng);
          ++cells;
          if (std::abs(mc.mean - bv.excess_risk) <= 3.0 * mc.std_error) ++hits;
        }
      }
    }
  }
  const double frac = double(hits) / cells;
  c.finish(frac >= 0.95, fmt("%d/%d cells within 3 MC standard errors (>=95%%)",
                             hits, cells));
}

// ---------------------------------------------------------------------------
// 4. linearization convergence in d
// ---------------------------------------------------------------------------
void criterion_linearization() {
  Criterion c(4, "linearization convergence");
  bool pass = true;
  std::ostringstream detail;
  for (const auto& [name, spec] :
       {std::pair<const char*, KernelSpec>{"poly5", KernelSpec::inner_polynomial(5)},
        std::pair<const char*, KernelSpec>{"gauss", KernelSpec::radial_gaussian()}}) {
    std::vector<double> med_gram, med_cross;
    for (Index d : {100, 200, 400}) {
      std::vector<double> gaps_g, gaps_c;
      for (int s = 0; s < 5; ++s) {
        Rng rng(mix64(4000 + s, d));
        // Unnormalized spectra keep |Sigma| = O(1) in d, the regime the
        // convergence statement assumes; normalizing to tau = 1 lets the top
        // eigenvalue grow with d and the gap need not shrink.
        const auto pair = make_covariance_pair(d, 0.5, /*normalize=*/false, rng);
        const Matrix X = sample_design(rng, d, pair.sigma_p);
        const Matrix T = sample_design(rng, d, pair.sigma_q);
        const auto gap = linearization_gap(spec, pair.sigma_p, pair.sigma_q, X, T);
        gaps_g.push_back(gap.gap_gram);
        gaps_c.push_back(gap.gap_cross);
      }
      std::sort(gaps_g.begin(), gaps_g.end());
      std::sort(gaps_c.begin(), gaps_c.end());
      med_gram.push_back(gaps_g[2]);
      med_cross.push_back(gaps_c[2]);
    }
    const bool gram_dec = med_gram[0] > med_gram[1] && med_gram[1] > med_gram[2];
    const bool cross_dec = med_cross[0] > med_cross[1] && med_cross[1] > med_cross[2];
    pass = pass && gram_dec && cross_dec;
    detail << name << " gram " << fmt("%.3g>%.3g>%.3g", med_gram[0], med_gram[1],
                                      med_gram[2])
           << (gram_dec ? " ok" : " BAD") << ", cross "
           << fmt("%.3g>%.3g>%.3g", med_cross[0], med_cross[1], med_cross[2])
           << (cross_dec ? " ok" : " BAD") << "; ";
  }
  c.finish(pass, detail.str());
}

// ---------------------------------------------------------------------------
// 5 + 6. bound dominance and Figure-1 shape on the desk preset
// ---------------------------------------------------------------------------
struct ShapeStats {
  std::map<double, std::map<Index, std::vector<double>>> var, bias;
};

ShapeStats collect(const std::vector<SweepRecord>& records) {
  ShapeStats s;
  for (const auto& r : records) {
    s.var[r.decay_a][r.n].push_back(r.variance);
    s.bias[r.decay_a][r.n].push_back(r.bias_sq);
  }
  return s;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / v.size();
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double sum = 0.0;
  for (double x : v) sum += (x - mu) * (x - mu);
  return std::sqrt(sum / (v.size() - 1));
}

void criterion_dominance_and_shape(const SweepResult& result, const SweepConfig& cfg,
                                   int id_offset) {
  {
    Criterion c(5 + id_offset, "bound dominance");
    const std::size_t expected =
        cfg.decay_list.size() * cfg.n_list.size() * static_cast<std::size_t>(cfg.seeds);
    int var_ok = 0, bias_ok = 0;
    for (const auto& r : result.records) {
      if (r.bound_variance_dominated + r.bound_variance_residual >= r.variance)
        ++var_ok;
      if (r.bound_bias_in + r.bound_bias_iw >= r.bias_sq) ++bias_ok;
    }
    const double n_rec = double(result.records.size());
    const bool pass = !result.records.empty() &&
                      result.records.size() == expected &&
                      var_ok / n_rec >= 0.95 && bias_ok / n_rec >= 0.95;
    c.finish(pass, fmt("variance %d/%zu, bias %d/%zu cells dominated (>=95%%)",
                       var_ok, result.records.size(), bias_ok,
                       result.records.size()));
  }
  {
    Criterion c(6 + id_offset, "figure-1 shape");
    const ShapeStats stats = collect(result.records);
    const Index d = cfg.d;
    const Index n_low = cfg.n_list.front();         // 0.2 d
    const Index n_high = cfg.n_list.back();         // 4 d
    Index n_peak = cfg.n_list[0];                   // n closest to d
    for (Index n : cfg.n_list)
      if (std::abs(double(n - d)) < std::abs(double(n_peak - d))) n_peak = n;

    bool pass = true;
    std::ostringstream detail;
    for (const auto& [a, by_n] : stats.var) {
      const double at_peak = mean_of(by_n.at(n_peak));
      const double at_low = mean_of(by_n.at(n_low));
      const double at_high = mean_of(by_n.at(n_high));
      const bool unimodal = at_peak > at_low && at_peak > at_high;
      pass = pass && unimodal;
      detail << fmt("a=%g var(%td)=%.3f>{%.3f,%.3f}%s ", a, (std::ptrdiff_t)n_peak,
                    at_peak, at_low, at_high, unimodal ? "" : "!");
    }
    for (const auto& [a, by_n] : stats.bias) {
      // Nonincreasing within one std band: a step up is tolerated only while
      // the two points' +/- 1 std bands still overlap in the decreasing
      // direction, i.e. mean_next - sd_next <= mean_prev + sd_prev.
      bool noninc = true;
      double prev_mean = 0.0, prev_sd = 0.0;
      bool have_prev = false;
      for (const auto& [n, values] : by_n) {
        if (n < (d + 1) / 2 || n > 4 * d) continue;  // 0.5 d .. 4 d window
        const double mu = mean_of(values);
        const double sd = sd_of(values);
        if (have_prev && mu - sd > prev_mean + prev_sd) noninc = false;
        prev_mean = mu;
        prev_sd = sd;
        have_prev = true;
      }
      pass = pass && noninc;
      detail << fmt("a=%g bias noninc=%s ", a, noninc ? "yes" : "NO");
    }
    c.finish(pass, detail.str());
  }
}

// ---------------------------------------------------------------------------
// 7. schedule arithmetic
// ---------------------------------------------------------------------------
void criterion_schedule() {
  Criterion c(7, "schedule arithmetic");
  ScheduleParams p;  // r_bar = 1/2, s = 1, t = 0, c_w2 = 0
  const auto sched = lambda_schedule(p, 1000);
  const bool half_exact = sched.c_lambda == 0.5;

  ScheduleParams q;
  q.W_wbar = 3.0;
  q.sigma_wbar = 0.7;
  q.E_qbar = 1.4;
  q.zeta = 0.5;
  q.delta = 0.2;
  q.t_wbar = 0.25;
  q.s_qbar = 0.6;
  q.c_w2 = 0.05;
  q.c_w1 = 0.1;
  const auto s2 = lambda_schedule(q, 317);
  const double a_bar = q.t_wbar + (1.0 - q.t_wbar) * q.s_qbar;
  const double rhs = 64.0 * (q.W_wbar + q.sigma_wbar * q.sigma_wbar) *
                     std::pow(q.E_qbar, 2.0 * (1.0 - q.t_wbar)) *
                     std::pow(2.0 / q.zeta, 2.0 * q.c_w2) *
                     std::pow(std::log(6.0 / q.delta), 2.0);
  const double rel =
      std::abs(std::pow(s2.C_lambda, 1.0 + a_bar) - rhs) / rhs;
  c.finish(half_exact && rel <= 1e-10,
           fmt("c_lambda == 1/2 exactly: %s; constant equality rel err %.2e (<=1e-10)",
               half_exact ? "yes" : "NO", rel));
}

// ---------------------------------------------------------------------------
// 8. determinism across thread counts
// ---------------------------------------------------------------------------
std::string csv_bytes(const std::vector<SweepRecord>& records) {
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("kshift_acc_" + std::to_string(::getpid()) + ".csv");
  emit_csv(records, tmp.string());
  std::ifstream in(tmp, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::filesystem::remove(tmp);
  return buf.str();
}

void criterion_determinism(const SweepResult& multi, const SweepConfig& cfg) {
  Criterion c(8, "determinism");
  const SweepResult single = run_sweep(cfg, 1);
  const std::string a = csv_bytes(multi.records);
  const std::string b = csv_bytes(single.records);
  c.finish(a == b, fmt("%zu-byte CSV identical across thread counts: %s", a.size(),
                       a == b ? "yes" : "NO"));
}

// ---------------------------------------------------------------------------
// 9. joint scaling invariance
// ---------------------------------------------------------------------------
void criterion_scaling() {
  Criterion c(9, "scaling invariance");
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 30, d = 12;
    const Matrix X = random_rows(7000 + trial, n, d);
    const Matrix K = gram(KernelSpec::inner_polynomial(4), X);
    Rng rng(8000 + trial);
    const Vector y = Vector::NullaryExpr(n, [&](Index) { return rng.normal(); });
    const Vector w = Vector::NullaryExpr(n, [&](Index) { return 0.3 + rng.uniform(); });
    const Matrix cross = random_rows(9000 + trial, 8, d) * X.transpose() / double(d);
    const double lambda = 0.05 + rng.uniform();

    const Vector p1 = predict(fit(K, y, lambda, w), cross);
    const Vector p2 = predict(fit(K, y, 10.0 * lambda, (10.0 * w).eval()), cross);
    worst = std::max(worst,
                     (p1 - p2).cwiseAbs().maxCoeff() / p1.cwiseAbs().maxCoeff());
  }
  c.finish(worst <= 1e-12, fmt("max relative deviation %.2e (<=1e-12)", worst));
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  int threads = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--full") == 0) full = true;
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
      threads = std::atoi(argv[++i]);
  }

  std::printf("acceptance suite (desk preset: d=200, 8 sizes, 5 seeds)\n");
  criterion_capacity();
  criterion_solver();
  criterion_decomposition();
  criterion_linearization();

  const SweepConfig cfg = desk_preset();
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult preset = run_sweep(cfg, threads);
  std::printf("      (desk preset sweep: %zu records, %zu errors, %.1f s)\n",
              preset.records.size(), preset.errors.size(),
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count());
  criterion_dominance_and_shape(preset, cfg, 0);
  criterion_schedule();
  criterion_determinism(preset, cfg);
  criterion_scaling();

  if (full) {
    std::printf("running the full-scale profile (d=500, 16 sizes, 10 seeds)...\n");
    const SweepConfig full = full_preset();
    const auto p0 = std::chrono::steady_clock::now();
    const SweepResult result = run_sweep(full, threads);
    std::printf("      (full profile: %zu records, %zu errors, %.1f s)\n",
                result.records.size(), result.errors.size(),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - p0)
                    .count());
    criterion_dominance_and_shape(result, full, 10);
  }

  std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
              g_failures);
  return g_failures;
}
