// Command-line front end: experiment runs, the projection benchmark, the
// adjoint gradient check and the synthetic quadratic corpus.
//
// Exit codes: 0 converged/completed, 2 iteration budget reached,
// 3 line-search failure, 64 configuration error.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcbb/experiment.hpp"
#include "pcbb/fields_io.hpp"
#include "pcbb/heat_fvm.hpp"
#include "pcbb/kernels.hpp"
#include "pcbb/knapsack.hpp"
#include "pcbb/rng.hpp"

namespace {

constexpr int kExitMaxIter = 2;
constexpr int kExitLineSearch = 3;
constexpr int kExitConfig = 64;

int status_to_exit(pcbb::SolveStatus status) {
  switch (status) {
    case pcbb::SolveStatus::kConverged: return 0;
    case pcbb::SolveStatus::kMaxIterations: return kExitMaxIter;
    case pcbb::SolveStatus::kLineSearchFailure: return kExitLineSearch;
  }
  return 1;
}

// --set section.key=value overrides applied on top of the config file
void apply_overrides(pcbb::ConfigMap& map, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw pcbb::ConfigError("malformed --set override '" + ov +
                              "', expected section.key=value");
    }
    map.set(ov.substr(0, dot), ov.substr(dot + 1, eq - dot - 1), ov.substr(eq + 1));
  }
}

struct RunArgs {
  std::string config_path;
  std::string problem;
  std::string output_dir;
  int grid_n = -1;
  double ratio = -1.0;
  double penalization = -1.0;
  double volume_fraction = -1.0;
  int iterations = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> overrides;
};

int cmd_run(const RunArgs& args) {
  pcbb::ConfigMap map;
  if (!args.config_path.empty()) map = pcbb::ConfigMap::parse_file(args.config_path);
  if (!args.problem.empty()) map.set("experiment", "problem", args.problem);
  if (!args.output_dir.empty()) map.set("experiment", "output_dir", args.output_dir);
  if (args.grid_n > 0) map.set("problem", "grid_n", std::to_string(args.grid_n));
  if (args.ratio > 0) map.set("problem", "conductivity_ratio", pcbb::format_double(args.ratio));
  if (args.penalization > 0) {
    map.set("problem", "penalization", pcbb::format_double(args.penalization));
  }
  if (args.volume_fraction > 0) {
    map.set("problem", "volume_fraction", pcbb::format_double(args.volume_fraction));
  }
  if (args.iterations >= 0) {
    map.set("experiment", "iterations", std::to_string(args.iterations));
  }
  if (args.seed_given) map.set("experiment", "seed", std::to_string(args.seed));
  apply_overrides(map, args.overrides);

  const pcbb::ExperimentConfig cfg = pcbb::ExperimentConfig::from_config(map);
  const pcbb::RunReport report = pcbb::run_experiment(cfg);

  std::cout << "problem: " << to_string(cfg.problem) << "\n";
  if (!report.history.empty()) {
    const auto& last = report.history.back();
    std::cout << "iterations: " << last.k << "\n"
              << "objective: " << pcbb::format_double(last.f);
    if (report.f_initial != 0.0) {
      std::cout << "  (scaled " << pcbb::format_double(last.f / report.f_initial) << ")";
    }
    std::cout << "\nstationarity: " << pcbb::format_double(last.d1_inf) << "\n"
              << "objective evaluations: " << last.f_evals
              << ", gradient evaluations: " << last.g_evals << "\n";
  }
  std::cout << "status: " << to_string(report.status) << "\n"
            << "timings [s]: setup " << pcbb::format_double(report.timings.setup_seconds)
            << ", solve " << pcbb::format_double(report.timings.solve_seconds) << ", io "
            << pcbb::format_double(report.timings.io_seconds) << "\n"
            << "outputs in: " << cfg.output_dir << "\n";
  return status_to_exit(report.status);
}

int cmd_bench(const std::vector<std::size_t>& sizes, int trials, std::uint64_t seed,
              const std::string& output_dir) {
  std::printf("%12s %8s %12s %12s %12s %12s %8s\n", "n", "trials", "mean_ms", "min_ms",
              "max_ms", "brent_mean", "brent_max");
  std::vector<pcbb::ProjectionBenchResult> rows;
  for (std::size_t n : sizes) {
    const auto r = pcbb::projection_bench(n, trials, seed);
    rows.push_back(r);
    std::printf("%12zu %8d %12.4f %12.4f %12.4f %12.2f %8d\n", r.n, r.trials, r.mean_ms,
                r.min_ms, r.max_ms, r.mean_brent_iterations, r.max_brent_iterations);
  }
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    std::ofstream out(std::filesystem::path(output_dir) / "projection_bench.csv");
    out << "n,trials,mean_ms,min_ms,max_ms,mean_brent_iters,max_brent_iters,max_residual\n";
    for (const auto& r : rows) {
      out << r.n << ',' << r.trials << ',' << pcbb::format_double(r.mean_ms) << ','
          << pcbb::format_double(r.min_ms) << ',' << pcbb::format_double(r.max_ms) << ','
          << pcbb::format_double(r.mean_brent_iterations) << ',' << r.max_brent_iterations
          << ',' << pcbb::format_double(r.max_feasibility_residual) << '\n';
    }
  }
  return 0;
}

int cmd_check_gradient(int grid_n, double ratio, double penalization, int directions,
                       double step, std::uint64_t seed, double pcg_tol, double tolerance) {
  pcbb::HeatProblem prob =
      pcbb::HeatProblem::uniform(2, grid_n, 1.0, ratio, penalization, 0.4);
  pcbb::HeatObjective obj(prob, pcg_tol);
  const std::size_t n = prob.grid.cell_count();
  pcbb::Rng rng(seed);

  // interior random design, then random zero-sum directions
  std::vector<double> w(n);
  for (auto& v : w) v = rng.uniform(0.25, 0.55);
  std::vector<double> grad(n);
  obj.value_and_gradient(w, grad);

  double worst = 0.0;
  for (int d = 0; d < directions; ++d) {
    std::vector<double> dir(n);
    double mean = 0.0;
    for (auto& v : dir) {
      v = rng.normal();
      mean += v;
    }
    mean /= static_cast<double>(n);
    double norm = 0.0;
    for (auto& v : dir) {
      v -= mean;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : dir) v /= norm;

    std::vector<double> wp(n), wm(n);
    for (std::size_t i = 0; i < n; ++i) {
      wp[i] = w[i] + step * dir[i];
      wm[i] = w[i] - step * dir[i];
    }
    const double fp = obj.value(wp);
    const double fm = obj.value(wm);
    const double fd = (fp - fm) / (2.0 * step);
    const double analytic = pcbb::kernels::dot(grad, dir);
    const double rel = std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-300);
    worst = std::max(worst, rel);
    std::printf("direction %3d: adjoint % .12e  fd % .12e  rel_err %.3e\n", d, analytic,
                fd, rel);
  }
  std::printf("max relative error: %.3e (tolerance %.1e)\n", worst, tolerance);
  return worst <= tolerance ? 0 : 1;
}

int cmd_corpus(int n, int count, std::uint64_t seed, const std::string& output_dir,
               double condition) {
  pcbb::SolverConfig solver_cfg;
  solver_cfg.epsilon = 1e-7;
  solver_cfg.max_iterations = 5000;
  const auto rows = pcbb::run_quadratic_corpus(n, count, seed, solver_cfg, condition);
  int converged = 0;
  for (const auto& r : rows) {
    if (r.status == pcbb::SolveStatus::kConverged) ++converged;
  }
  std::printf("corpus: %d/%d instances converged (n=%d, seed=%llu)\n", converged, count, n,
              static_cast<unsigned long long>(seed));
  if (!output_dir.empty()) {
    pcbb::write_corpus_csv(rows, std::filesystem::path(output_dir) / "corpus_results.csv");
    std::printf("results written to %s/corpus_results.csv\n", output_dir.c_str());
  }
  return converged == count ? 0 : kExitMaxIter;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected cyclic Barzilai-Borwein optimizer and heat-conduction "
               "topology-optimization testbed"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a configured experiment");
  run->add_option("--config", run_args.config_path, "configuration file");
  run->add_option("--problem", run_args.problem,
                  "heat2d | heat3d | quadratic | projection-bench");
  run->add_option("--output-dir", run_args.output_dir, "output directory");
  run->add_option("--grid-n", run_args.grid_n, "cells per axis for heat problems");
  run->add_option("--ratio", run_args.ratio, "conductivity ratio k_beta/k_alpha");
  run->add_option("--p", run_args.penalization, "penalization exponent");
  run->add_option("--R", run_args.volume_fraction, "volume fraction");
  run->add_option("--iterations", run_args.iterations, "solver iteration budget");
  auto* run_seed = run->add_option("--seed", run_args.seed, "random seed");
  run->add_option("--set", run_args.overrides,
                  "override a config key: section.key=value (repeatable)");

  std::vector<std::size_t> bench_sizes{100000};
  int bench_trials = 5;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench-projection",
                                   "time knapsack projections on random instances");
  bench->add_option("--n", bench_sizes, "instance sizes (repeatable)");
  bench->add_option("--trials", bench_trials, "trials per size");
  bench->add_option("--seed", bench_seed, "random seed")->required();
  bench->add_option("--output-dir", bench_out, "also write a CSV table here");

  int cg_n = 16, cg_dirs = 20;
  double cg_ratio = 2.0, cg_p = 1.0, cg_step = 1e-6, cg_pcg_tol = 1e-15, cg_tol = 1e-5;
  std::uint64_t cg_seed = 1;
  auto* cg = app.add_subcommand("check-gradient",
                                "compare the adjoint design gradient with central "
                                "finite differences");
  cg->add_option("--grid-n", cg_n, "cells per axis");
  cg->add_option("--ratio", cg_ratio, "conductivity ratio");
  cg->add_option("--p", cg_p, "penalization exponent");
  cg->add_option("--directions", cg_dirs, "number of random feasible directions");
  cg->add_option("--step", cg_step, "finite-difference step");
  cg->add_option("--seed", cg_seed, "random seed");
  cg->add_option("--pcg-tol", cg_pcg_tol, "linear solver tolerance");
  cg->add_option("--tolerance", cg_tol, "pass/fail relative error threshold");

  int corpus_n = 6, corpus_count = 200;
  std::uint64_t corpus_seed = 0;
  double corpus_cond = 25.0;
  std::string corpus_out;
  auto* corpus = app.add_subcommand("corpus",
                                    "solve a batch of random constrained quadratics");
  corpus->add_option("--n", corpus_n, "problem dimension");
  corpus->add_option("--count", corpus_count, "number of instances");
  corpus->add_option("--seed", corpus_seed, "random seed")->required();
  corpus->add_option("--condition", corpus_cond, "spectral condition number");
  corpus->add_option("--output-dir", corpus_out, "write per-instance results here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      run_args.seed_given = run_seed->count() > 0;
      return cmd_run(run_args);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_sizes, bench_trials, bench_seed, bench_out);
    }
    if (cg->parsed()) {
      return cmd_check_gradient(cg_n, cg_ratio, cg_p, cg_dirs, cg_step, cg_seed,
                                cg_pcg_tol, cg_tol);
    }
    if (corpus->parsed()) {
      return cmd_corpus(corpus_n, corpus_count, corpus_seed, corpus_out, corpus_cond);
    }
  } catch (const pcbb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
