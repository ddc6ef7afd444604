#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kshift/bounds.hpp"
#include "kshift/config.hpp"
#include "kshift/estimator.hpp"
#include "kshift/synthdata.hpp"

namespace kshift {

/// User-overridable constants of the theoretical bounds.
struct BoundConstants {
  double c_tilde = 1.0;
  double eps_log = 0.05;
  double delta = 0.05;
  int m_p = 8;  // moment order of the boundedness condition, training side
  int m_q = 8;  // test side
};

struct LambdaRule {
  enum class Kind { Schedule, FixedExponent, FixedValue };
  Kind kind = Kind::FixedExponent;
  double exponent = 0.5;
  double constant = 0.0;  // 0 means auto: gamma_p / 10
  double value = 0.0;     // FixedValue only
  ScheduleParams schedule;
};

struct SweepConfig {
  Index d = 500;
  std::vector<Index> n_list = {100, 200, 300, 400,  450,  480,  520,  550,
                               600, 700, 784, 900, 1000, 1200, 1500, 2000};
  Index n_test = 2500;
  std::vector<double> decay_list = {0.5, 1.0, 1.5};
  KernelSpec kernel = KernelSpec::inner_polynomial(5);
  WeightingScheme weighting = WeightingScheme::truncated_ratio(10.0);
  double sigma_eps = 1.0;
  LambdaRule lambda_rule;
  int seeds = 10;
  std::uint64_t master_seed = 1234;
  BoundConstants bound_constants;
  std::string output_dir = "out";
  bool normalize_covariance = false;
  int mc_draws = 0;  // 0 disables the Monte-Carlo risk column
};

/// Full-scale protocol: d = 500, 2500 test points, 16 training sizes,
/// 10 seeds. Same as a default-constructed SweepConfig.
SweepConfig full_preset();

/// Desk-scale protocol for CI: d = 200, 1000 test points, 8 training sizes
/// spanning 0.2 d .. 4 d, 5 seeds.
SweepConfig desk_preset();

/// Parses and validates a key-value document into a SweepConfig. Unknown
/// keys, malformed values and invariant violations raise ConfigError naming
/// the offending key. An empty document yields full_preset() defaults;
/// `preset = desk` rebinds the defaults before explicit keys apply.
SweepConfig validate_config(const KvDocument& doc);

/// One experiment cell. Field order here is the frozen CSV column order.
struct SweepRecord {
  int seed_index = 0;
  Index n = 0;
  Index d = 0;
  double decay_a = 0.0;
  double lambda = 0.0;
  std::string weighting_mode;
  double bias_sq = 0.0;
  double variance = 0.0;
  double excess_risk = 0.0;
  std::optional<double> mc_excess_risk;
  double bound_variance_dominated = 0.0;
  double bound_variance_residual = 0.0;
  double bound_bias_in = 0.0;
  double bound_bias_iw = 0.0;
  double capacity_value = 0.0;
  double effective_dimension_q = 0.0;
  double gap_gram = 0.0;
  double wall_ms = 0.0;
};

struct ErrorRow {
  double decay_a = 0.0;
  Index n = 0;
  int seed_index = 0;
  std::string reason;  // machine-readable enum token
};

struct SweepResult {
  std::vector<SweepRecord> records;  // sorted by (decay_a, n, seed_index)
  std::vector<ErrorRow> errors;
};

using ProgressSink = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (decay, n, seed) cell. Cells are pure functions of the config
/// and their child seed mix64(master_seed, cell_index), so results do not
/// depend on the number of worker threads. Covariance pair, test design and
/// the test-operator spectrum are shared per (decay, seed) group through
/// group-scoped child seeds. Per-cell failures become ErrorRow entries and
/// never abort the sweep.
SweepResult run_sweep(const SweepConfig& cfg, int threads = 1,
                      const ProgressSink& progress = {});

extern const char* const kCsvHeader;

/// Writes records as CSV: frozen header, 17-significant-digit floats, rows
/// sorted by (decay_a, n, seed_index). wall_ms is serialized as 0 unless
/// with_timings is set, keeping default artifacts byte-identical across
/// runs and thread counts. Non-finite values are refused.
void emit_csv(const std::vector<SweepRecord>& records, const std::string& path,
              bool with_timings = false);

void emit_error_csv(const std::vector<ErrorRow>& errors, const std::string& path);

std::vector<SweepRecord> read_csv(const std::string& path);

}  // namespace kshift
