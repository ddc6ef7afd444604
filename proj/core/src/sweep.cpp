#include "kshift/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "kshift/spectral.hpp"

namespace kshift {

SweepConfig full_preset() { return SweepConfig{}; }

SweepConfig desk_preset() {
  SweepConfig cfg;
  cfg.d = 200;
  cfg.n_list = {40, 100, 160, 200, 240, 400, 600, 800};
  cfg.n_test = 1000;
  cfg.seeds = 5;
  return cfg;
}

namespace {

KernelSpec kernel_from_keys(const KvDocument& doc, std::set<std::string>& used,
                            const SweepConfig& base) {
  KernelSpec spec = base.kernel;
  std::string profile;
  if (const auto* e = doc.find("kernel.profile")) {
    used.insert(e->key);
    profile = e->value;
  }
  std::string family;
  if (const auto* e = doc.find("kernel.family")) {
    used.insert(e->key);
    family = e->value;
  }
  int degree = base.kernel.degree;
  if (const auto* e = doc.find("kernel.degree")) {
    used.insert(e->key);
    const long long v = kv_to_int(*e);
    if (v < 1) throw ConfigError("key \"kernel.degree\": must be >= 1");
    degree = static_cast<int>(v);
  }

  if (!profile.empty()) {
    if (profile == "polynomial") {
      spec.profile = ProfileKind::Polynomial;
      spec.family = KernelFamily::InnerProduct;
    } else if (profile == "exponential") {
      spec.profile = ProfileKind::Exponential;
      spec.family = KernelFamily::InnerProduct;
    } else if (profile == "gaussian") {
      spec.profile = ProfileKind::Gaussian;
      spec.family = KernelFamily::Radial;
    } else {
      throw ConfigError("key \"kernel.profile\": expected polynomial | exponential | "
                        "gaussian, got \"" + profile + "\"");
    }
  }
  if (!family.empty()) {
    if (family == "inner_product") spec.family = KernelFamily::InnerProduct;
    else if (family == "radial") spec.family = KernelFamily::Radial;
    else
      throw ConfigError("key \"kernel.family\": expected inner_product | radial, got \"" +
                        family + "\"");
  }
  spec.degree = degree;
  return spec;
}

}  // namespace

SweepConfig validate_config(const KvDocument& doc) {
  SweepConfig cfg;  // full-scale defaults
  std::set<std::string> used;

  if (const auto* e = doc.find("preset")) {
    used.insert(e->key);
    if (e->value == "full") cfg = full_preset();
    else if (e->value == "desk") cfg = desk_preset();
    else
      throw ConfigError("key \"preset\": expected desk | full, got \"" + e->value + "\"");
  }

  auto take_double = [&](const char* key, double& out) {
    if (const auto* e = doc.find(key)) {
      used.insert(e->key);
      out = kv_to_double(*e);
    }
  };
  auto take_int = [&](const char* key, auto& out, long long lo, const char* what) {
    if (const auto* e = doc.find(key)) {
      used.insert(e->key);
      const long long v = kv_to_int(*e);
      if (v < lo)
        throw ConfigError(std::string("key \"") + key + "\": " + what);
      out = static_cast<std::decay_t<decltype(out)>>(v);
    }
  };

  take_int("d", cfg.d, 2, "dimension must be >= 2");
  take_int("n_test", cfg.n_test, 1, "test count must be >= 1");
  take_int("seeds", cfg.seeds, 1, "seed count must be >= 1");
  if (const auto* e = doc.find("master_seed")) {
    used.insert(e->key);
    cfg.master_seed = static_cast<std::uint64_t>(kv_to_int(*e));
  }
  take_double("sigma_eps", cfg.sigma_eps);
  if (cfg.sigma_eps < 0.0) throw ConfigError("key \"sigma_eps\": must be >= 0");

  if (const auto* e = doc.find("n_list")) {
    used.insert(e->key);
    cfg.n_list.clear();
    int i = 0;
    for (long long v : kv_to_int_list(*e)) {
      if (v < 1)
        throw ConfigError("key \"n_list[" + std::to_string(i) + "]\": must be >= 1");
      cfg.n_list.push_back(static_cast<Index>(v));
      ++i;
    }
    std::sort(cfg.n_list.begin(), cfg.n_list.end());
  }
  if (const auto* e = doc.find("decay_list")) {
    used.insert(e->key);
    cfg.decay_list.clear();
    int i = 0;
    for (double v : kv_to_double_list(*e)) {
      if (v < 0.0)
        throw ConfigError("key \"decay_list[" + std::to_string(i) + "]\": must be >= 0");
      cfg.decay_list.push_back(v);
      ++i;
    }
    std::sort(cfg.decay_list.begin(), cfg.decay_list.end());
  }

  cfg.kernel = kernel_from_keys(doc, used, cfg);

  if (const auto* e = doc.find("weighting.mode")) {
    used.insert(e->key);
    if (e->value == "unweighted") cfg.weighting = WeightingScheme::unweighted();
    else if (e->value == "true_ratio") cfg.weighting = WeightingScheme::true_ratio();
    else if (e->value == "truncated_ratio")
      cfg.weighting = WeightingScheme::truncated_ratio(cfg.weighting.cap);
    else
      throw ConfigError("key \"weighting.mode\": expected unweighted | true_ratio | "
                        "truncated_ratio, got \"" + e->value + "\"");
  }
  if (const auto* e = doc.find("weighting.cap")) {
    used.insert(e->key);
    const double cap = kv_to_double(*e);
    if (!(cap > 0.0)) throw ConfigError("key \"weighting.cap\": must be > 0");
    cfg.weighting.cap = cap;
  }

  if (const auto* e = doc.find("lambda.rule")) {
    used.insert(e->key);
    if (e->value == "schedule") cfg.lambda_rule.kind = LambdaRule::Kind::Schedule;
    else if (e->value == "fixed_exponent")
      cfg.lambda_rule.kind = LambdaRule::Kind::FixedExponent;
    else if (e->value == "fixed_value") cfg.lambda_rule.kind = LambdaRule::Kind::FixedValue;
    else
      throw ConfigError("key \"lambda.rule\": expected schedule | fixed_exponent | "
                        "fixed_value, got \"" + e->value + "\"");
  }
  take_double("lambda.exponent", cfg.lambda_rule.exponent);
  if (const auto* e = doc.find("lambda.constant")) {
    used.insert(e->key);
    if (e->value == "auto") cfg.lambda_rule.constant = 0.0;
    else {
      cfg.lambda_rule.constant = kv_to_double(*e);
      if (!(cfg.lambda_rule.constant > 0.0))
        throw ConfigError("key \"lambda.constant\": must be > 0 or auto");
    }
  }
  take_double("lambda.value", cfg.lambda_rule.value);
  if (cfg.lambda_rule.value < 0.0) throw ConfigError("key \"lambda.value\": must be >= 0");

  ScheduleParams& sp = cfg.lambda_rule.schedule;
  take_double("lambda.schedule.r_bar", sp.r_bar);
  take_double("lambda.schedule.s_qbar", sp.s_qbar);
  take_double("lambda.schedule.t_wbar", sp.t_wbar);
  take_double("lambda.schedule.c_w1", sp.c_w1);
  take_double("lambda.schedule.c_w2", sp.c_w2);
  take_double("lambda.schedule.w_wbar", sp.W_wbar);
  take_double("lambda.schedule.sigma_wbar", sp.sigma_wbar);
  take_double("lambda.schedule.e_qbar", sp.E_qbar);
  take_double("lambda.schedule.zeta", sp.zeta);
  take_double("lambda.schedule.delta", sp.delta);

  take_double("bounds.c_tilde", cfg.bound_constants.c_tilde);
  take_double("bounds.eps_log", cfg.bound_constants.eps_log);
  take_double("bounds.delta", cfg.bound_constants.delta);
  if (!(cfg.bound_constants.delta > 0.0 && cfg.bound_constants.delta < 1.0))
    throw ConfigError("key \"bounds.delta\": must be in (0, 1)");
  take_int("bounds.m_p", cfg.bound_constants.m_p, 0, "must be >= 0");
  take_int("bounds.m_q", cfg.bound_constants.m_q, 0, "must be >= 0");
  take_int("mc.draws", cfg.mc_draws, 0, "must be >= 0");

  if (const auto* e = doc.find("covariance.normalize")) {
    used.insert(e->key);
    cfg.normalize_covariance = kv_to_bool(*e);
  }
  if (const auto* e = doc.find("output_dir")) {
    used.insert(e->key);
    cfg.output_dir = e->value;
  }

  for (const auto& e : doc.entries)
    if (!used.count(e.key))
      throw ConfigError("unknown key \"" + e.key + "\" (line " + std::to_string(e.line) +
                        ")");

  if (cfg.d < 2) throw ConfigError("key \"d\": dimension must be >= 2");
  if (cfg.n_list.empty()) throw ConfigError("key \"n_list\": must not be empty");
  if (cfg.decay_list.empty()) throw ConfigError("key \"decay_list\": must not be empty");
  return cfg;
}

namespace {

// Group-scoped streams live far above any realistic cell index.
constexpr std::uint64_t kGroupSeedBase = 1ULL << 40;

struct CellGroup {
  CovariancePair pair;
  Matrix X_test;
  Vector f_rho_test;
  Vector q_spectrum;  // eigenvalues of K(X_test, X_test) / n_test
  ShiftDiagnostics diag;
  double lambda_constant = 0.0;  // resolved FixedExponent constant
  std::string error;
};

CellGroup build_group(const SweepConfig& cfg, double decay_a, int seed_index,
                      std::uint64_t group_stream) {
  CellGroup g;
  Rng pair_rng(mix64(cfg.master_seed, kGroupSeedBase + 2 * group_stream));
  g.pair = make_covariance_pair(cfg.d, decay_a, cfg.normalize_covariance, pair_rng);

  Rng test_rng(mix64(cfg.master_seed, kGroupSeedBase + 2 * group_stream + 1));
  g.X_test = sample_design(test_rng, cfg.n_test, g.pair.sigma_q);
  g.f_rho_test = target_values(g.X_test);

  const Matrix Kq = gram(cfg.kernel, g.X_test);
  g.q_spectrum = sym_eigenvalues(Kq) / static_cast<double>(cfg.n_test);

  g.diag = shift_diagnostics(g.pair.sigma_p, g.pair.sigma_q, cfg.bound_constants.m_p,
                             cfg.bound_constants.m_q);

  if (cfg.lambda_rule.kind == LambdaRule::Kind::FixedExponent) {
    g.lambda_constant = cfg.lambda_rule.constant;
    if (g.lambda_constant <= 0.0) {
      // Auto constant gamma * tau: at the interpolation threshold n = d the
      // explicit ridge lambda*n = gamma * tau * sqrt(d) stays a vanishing
      // fraction of the implicit curvature term for fast-decay spectra
      // (small tau) while still taming slow-decay ones.
      const LinearizedParams lin = linearize_params(cfg.kernel, g.pair.sigma_p);
      g.lambda_constant = lin.gamma * lin.tau;
    }
  }
  return g;
}

double cell_lambda(const SweepConfig& cfg, const CellGroup& g, Index n) {
  switch (cfg.lambda_rule.kind) {
    case LambdaRule::Kind::FixedValue:
      return cfg.lambda_rule.value;
    case LambdaRule::Kind::FixedExponent:
      return g.lambda_constant *
             std::pow(static_cast<double>(n), -cfg.lambda_rule.exponent);
    case LambdaRule::Kind::Schedule:
      return lambda_schedule(cfg.lambda_rule.schedule, n).lambda;
  }
  throw ConfigError("unknown lambda rule");
}

const char* classify_error(const std::exception& e) {
  if (dynamic_cast<const SingularSystemError*>(&e)) return "singular_system";
  if (dynamic_cast<const ModelError*>(&e)) return "model_error";
  if (dynamic_cast<const DataError*>(&e)) return "data_error";
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  return "internal_error";
}

bool record_is_finite(const SweepRecord& r) {
  const double fields[] = {r.decay_a,
                           r.lambda,
                           r.bias_sq,
                           r.variance,
                           r.excess_risk,
                           r.mc_excess_risk.value_or(0.0),
                           r.bound_variance_dominated,
                           r.bound_variance_residual,
                           r.bound_bias_in,
                           r.bound_bias_iw,
                           r.capacity_value,
                           r.effective_dimension_q,
                           r.gap_gram,
                           r.wall_ms};
  for (double v : fields)
    if (!std::isfinite(v)) return false;
  return true;
}

SweepRecord run_cell(const SweepConfig& cfg, const CellGroup& g, double decay_a, Index n,
                     int seed_index, std::uint64_t cell_index) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t cell_seed = mix64(cfg.master_seed, cell_index);

  DatasetConfig dc;
  dc.d = cfg.d;
  dc.n_train = n;
  dc.n_test = cfg.n_test;
  dc.decay_a = decay_a;
  dc.sigma_eps = cfg.sigma_eps;
  dc.seed = cell_seed;
  dc.normalize_covariance = cfg.normalize_covariance;
  const DataEnsemble ens = gen_dataset_with(dc, g.pair, g.X_test, g.f_rho_test);

  const Vector weights = weight_vector(cfg.weighting, g.pair, ens.X_train);
  const Vector true_ratio =
      cfg.weighting.mode == WeightingScheme::Mode::TrueRatio
          ? weights
          : weight_vector(WeightingScheme::true_ratio(), g.pair, ens.X_train);
  const double lambda = cell_lambda(cfg, g, n);

  const Matrix K = gram(cfg.kernel, ens.X_train);
  const LinearizedParams lin = linearize_params(cfg.kernel, g.pair.sigma_p);
  const Vector psi = psi_vector(ens.X_train, lin.tau);
  const Matrix K_lin = gram_linearized(lin, ens.X_train, psi);
  const Matrix cross = cross_gram(cfg.kernel, ens.X_train, ens.X_test);

  const BiasVarianceReport bv = decompose(K, cross, ens.f_rho_train, ens.f_rho_test,
                                          lambda, weights, cfg.sigma_eps);

  const VarianceBound vb =
      variance_bound(ens.X_train, g.pair.sigma_q, lin, lambda, weights, cfg.sigma_eps,
                     g.diag, cfg.bound_constants.eps_log);
  const double w_max = cfg.weighting.mode == WeightingScheme::Mode::TruncatedRatio
                           ? cfg.weighting.cap
                           : true_ratio.maxCoeff();
  const BiasBound bb = bias_bound_arbitrary(K_lin, true_ratio, weights, lambda,
                                            gram_kappa(K), w_max,
                                            cfg.bound_constants.delta, g.diag,
                                            cfg.bound_constants.c_tilde,
                                            cfg.bound_constants.eps_log);

  SweepRecord r;
  r.seed_index = seed_index;
  r.n = n;
  r.d = cfg.d;
  r.decay_a = decay_a;
  r.lambda = lambda;
  r.weighting_mode = weighting_mode_name(cfg.weighting.mode);
  r.bias_sq = bv.bias_sq;
  r.variance = bv.variance;
  r.excess_risk = bv.excess_risk;
  if (cfg.mc_draws > 0) {
    Rng mc_rng(mix64(cell_seed, 5));
    r.mc_excess_risk = excess_risk_mc(K, cross, ens.f_rho_train, ens.f_rho_test, lambda,
                                      weights, cfg.sigma_eps, cfg.mc_draws, mc_rng);
  }
  r.bound_variance_dominated = vb.dominated;
  r.bound_variance_residual = vb.residual;
  r.bound_bias_in = bb.intrinsic;
  r.bound_bias_iw = bb.reweighting;
  r.capacity_value = vb.capacity_value;
  if (lambda > 0.0) {
    r.effective_dimension_q = effective_dimension(g.q_spectrum, lambda);
  } else {
    // lambda -> 0+ limit: count of eigenvalues above the numerical floor.
    const double floor = 1e-12 * g.q_spectrum.cwiseAbs().maxCoeff();
    r.effective_dimension_q =
        static_cast<double>((g.q_spectrum.array() > floor).count());
  }
  r.gap_gram = spectral_norm_sym(K - K_lin);

  const auto t1 = std::chrono::steady_clock::now();
  r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  if (!record_is_finite(r)) throw ModelError("nonfinite_metric");
  return r;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min<std::size_t>(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, int threads, const ProgressSink& progress) {
  const std::size_t n_decay = cfg.decay_list.size();
  const std::size_t n_sizes = cfg.n_list.size();
  const std::size_t n_seeds = static_cast<std::size_t>(cfg.seeds);
  const std::size_t n_groups = n_decay * n_seeds;
  const std::size_t n_cells = n_decay * n_sizes * n_seeds;

  // Phase 1: shared per-(decay, seed) state.
  std::vector<CellGroup> groups(n_groups);
  parallel_for(n_groups, threads, [&](std::size_t gi) {
    const std::size_t decay_idx = gi / n_seeds;
    const int seed_index = static_cast<int>(gi % n_seeds);
    try {
      groups[gi] = build_group(cfg, cfg.decay_list[decay_idx], seed_index, gi);
    } catch (const std::exception& e) {
      groups[gi].error = classify_error(e);
    }
  });

  // Phase 2: independent cells.
  std::vector<std::optional<SweepRecord>> slots(n_cells);
  std::vector<std::optional<ErrorRow>> error_slots(n_cells);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(n_cells, threads, [&](std::size_t ci) {
    const std::size_t decay_idx = ci / (n_sizes * n_seeds);
    const std::size_t size_idx = (ci / n_seeds) % n_sizes;
    const int seed_index = static_cast<int>(ci % n_seeds);
    const double decay_a = cfg.decay_list[decay_idx];
    const Index n = cfg.n_list[size_idx];
    const CellGroup& g = groups[decay_idx * n_seeds + seed_index];

    if (!g.error.empty()) {
      error_slots[ci] = ErrorRow{decay_a, n, seed_index, g.error};
    } else {
      try {
        slots[ci] = run_cell(cfg, g, decay_a, n, seed_index, ci);
      } catch (const std::exception& e) {
        const std::string reason =
            std::string(e.what()) == "nonfinite_metric" ? "nonfinite_metric"
                                                        : classify_error(e);
        error_slots[ci] = ErrorRow{decay_a, n, seed_index, reason};
      }
    }
    const std::size_t completed = done.fetch_add(1) + 1;
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(completed, n_cells);
    }
  });

  SweepResult result;
  result.records.reserve(n_cells);
  for (auto& slot : slots)
    if (slot) result.records.push_back(std::move(*slot));
  for (auto& slot : error_slots)
    if (slot) result.errors.push_back(std::move(*slot));

  std::sort(result.records.begin(), result.records.end(),
            [](const SweepRecord& a, const SweepRecord& b) {
              if (a.decay_a != b.decay_a) return a.decay_a < b.decay_a;
              if (a.n != b.n) return a.n < b.n;
              return a.seed_index < b.seed_index;
            });
  std::sort(result.errors.begin(), result.errors.end(),
            [](const ErrorRow& a, const ErrorRow& b) {
              if (a.decay_a != b.decay_a) return a.decay_a < b.decay_a;
              if (a.n != b.n) return a.n < b.n;
              return a.seed_index < b.seed_index;
            });
  return result;
}

}  // namespace kshift
