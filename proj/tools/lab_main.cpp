// kshift-lab: experiment harness for importance-weighted kernel ridge
// regression under covariate shift.
//
//   kshift-lab sweep [config] [--out DIR] [--threads N] [--seed S] [--timings]
//   kshift-lab plot  <csv> <out_prefix>
//   kshift-lab check [config] [--d-grid ...] [--seeds N]
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "kshift/plot.hpp"
#include "kshift/sweep.hpp"

namespace {

kshift::SweepConfig load_config(const std::string& path) {
  if (path.empty()) return kshift::validate_config(kshift::KvDocument{});
  return kshift::validate_config(kshift::KvDocument::parse_file(path));
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int threads,
              long long seed_override, bool has_seed, bool timings, bool quiet) {
  kshift::SweepConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (has_seed) cfg.master_seed = static_cast<std::uint64_t>(seed_override);

  std::filesystem::create_directories(cfg.output_dir);

  kshift::ProgressSink progress;
  if (!quiet)
    progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r[%zu/%zu] cells", done, total);
      if (done == total) std::fprintf(stderr, "\n");
    };

  const kshift::SweepResult result = kshift::run_sweep(cfg, threads, progress);
  if (result.records.empty()) {
    std::fprintf(stderr, "error: every cell failed (%zu error rows)\n",
                 result.errors.size());
    return 2;
  }

  const std::string csv_path = cfg.output_dir + "/sweep.csv";
  kshift::emit_csv(result.records, csv_path, timings);
  std::fprintf(stderr, "wrote %s (%zu records)\n", csv_path.c_str(),
               result.records.size());
  if (!result.errors.empty()) {
    const std::string err_path = cfg.output_dir + "/sweep_errors.csv";
    kshift::emit_error_csv(result.errors, err_path);
    std::fprintf(stderr, "wrote %s (%zu error rows)\n", err_path.c_str(),
                 result.errors.size());
  }

  if (cfg.n_list.size() >= 2) {
    const auto plots = kshift::emit_plots(result.records, cfg.output_dir + "/");
    std::fprintf(stderr, "wrote %zu plot files under %s\n", plots.size(),
                 cfg.output_dir.c_str());
  } else {
    std::fprintf(stderr, "skipping plots: need at least 2 training sizes\n");
  }
  return 0;
}

int cmd_plot(const std::string& csv_path, const std::string& out_prefix) {
  const auto records = kshift::read_csv(csv_path);
  const auto plots = kshift::emit_plots(records, out_prefix);
  for (const auto& p : plots) std::fprintf(stderr, "wrote %s\n", p.c_str());
  return 0;
}

int cmd_check(const std::string& config_path, std::vector<long long> d_grid, int seeds) {
  kshift::SweepConfig cfg = load_config(config_path);
  if (d_grid.empty()) d_grid = {100, 200, 400};

  std::printf("kernel linearization and shift diagnostics\n");
  std::printf("==========================================\n");
  for (double a : cfg.decay_list) {
    std::printf("decay a = %g\n", a);
    for (long long d : d_grid) {
      std::vector<double> gram_gaps, cross_gaps;
      kshift::ShiftDiagnostics diag{};
      for (int s = 0; s < seeds; ++s) {
        kshift::Rng rng(kshift::mix64(cfg.master_seed, 0xC0FFEE + 97 * s + d));
        const auto pair = kshift::make_covariance_pair(d, a, cfg.normalize_covariance, rng);
        const auto X = kshift::sample_design(rng, d, pair.sigma_p);
        const auto X_test = kshift::sample_design(rng, d, pair.sigma_q);
        const auto gap =
            kshift::linearization_gap(cfg.kernel, pair.sigma_p, pair.sigma_q, X, X_test);
        gram_gaps.push_back(gap.gap_gram);
        cross_gaps.push_back(gap.gap_cross);
        if (s == 0)
          diag = kshift::shift_diagnostics(pair.sigma_p, pair.sigma_q,
                                           cfg.bound_constants.m_p, cfg.bound_constants.m_q);
      }
      std::sort(gram_gaps.begin(), gram_gaps.end());
      std::sort(cross_gaps.begin(), cross_gaps.end());
      std::printf("  d = %4lld: median gram gap %.6g, median cross gap %.6g | "
                  "c_pq = %.4f, theta_q = %.4f, %s\n",
                  d, gram_gaps[gram_gaps.size() / 2], cross_gaps[cross_gaps.size() / 2],
                  diag.c_pq, diag.theta_q,
                  diag.admissible ? "admissible" : "NOT admissible");
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical lab for importance-weighted kernel ridge regression "
               "under covariate shift"};
  app.require_subcommand(1);

  std::string config_path, out_dir, csv_path, out_prefix;
  int threads = 0;
  long long seed_override = 0;
  bool timings = false, quiet = false;
  std::vector<long long> d_grid;
  int check_seeds = 5;

  auto* sweep = app.add_subcommand("sweep", "run the experiment sweep and emit CSV + SVG");
  sweep->add_option("config", config_path, "key-value config file (omit for defaults)");
  sweep->add_option("--out", out_dir, "output directory (overrides config output_dir)");
  sweep->add_option("--threads", threads, "worker threads (0 = hardware)");
  auto* seed_opt = sweep->add_option("--seed", seed_override, "master seed override");
  sweep->add_flag("--timings", timings,
                  "write measured per-cell wall_ms instead of deterministic zeros");
  sweep->add_flag("--quiet", quiet, "suppress progress output");

  auto* plot = app.add_subcommand("plot", "re-render SVG charts from a sweep CSV");
  plot->add_option("csv", csv_path, "input sweep.csv")->required();
  plot->add_option("out_prefix", out_prefix, "output path prefix")->required();

  auto* check = app.add_subcommand(
      "check", "run linearization-gap diagnostics and shift admissibility checks");
  check->add_option("config", config_path, "key-value config file (omit for defaults)");
  check->add_option("--d-grid", d_grid, "dimensions to probe (default 100 200 400)");
  check->add_option("--seeds", check_seeds, "seeds per dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // CLI11 prints usage; --help exits 0 here
  }

  try {
    if (sweep->parsed())
      return cmd_sweep(config_path, out_dir, threads, seed_override,
                       seed_opt->count() > 0, timings, quiet);
    if (plot->parsed()) return cmd_plot(csv_path, out_prefix);
    if (check->parsed()) return cmd_check(config_path, d_grid, check_seeds);
  } catch (const kshift::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const kshift::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
