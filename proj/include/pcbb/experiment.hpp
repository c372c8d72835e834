#pragma once

// Experiment orchestration: configuration binding, the desk-scale heat
// protocol runs, the synthetic quadratic corpus and the projection benchmark.
// History files stream row by row while the solver runs, so an interrupted
// run still leaves a parseable partial history.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pcbb/config.hpp"
#include "pcbb/heat_fvm.hpp"
#include "pcbb/solver.hpp"
#include "pcbb/synthetic.hpp"

namespace pcbb {

enum class ProblemKind { kHeat2d, kHeat3d, kQuadratic, kProjectionBench };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::kHeat2d;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int iterations = 15;  // solver iteration budget
  std::string output_dir = "out";

  // heat problems
  int grid_n = 64;
  double conductivity_ratio = 2.0;  // k_beta / k_alpha, k_alpha = 1
  double penalization = 1.0;
  double volume_fraction = 0.4;
  double load = 1.0;
  double theta0 = 0.0;
  double pcg_tol = 1e-12;

  // quadratic corpus
  int quad_n = 6;
  int quad_count = 1;
  double quad_condition = 25.0;

  // projection benchmark
  std::size_t bench_n = 100000;
  int bench_trials = 5;

  SolverConfig solver;

  static ExperimentConfig from_config(const ConfigMap& map);
  ConfigMap to_config() const;
  void validate() const;  // throws ConfigError
};

struct PhaseTimings {
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  double io_seconds = 0.0;
};

struct RunReport {
  std::vector<IterationRecord> history;  // row 0 is the initial state
  double f_initial = 0.0;
  SolveStatus status = SolveStatus::kMaxIterations;
  PhaseTimings timings;
  std::vector<double> design_final;  // heat runs and quadratic solutions
  std::vector<double> state_final;   // heat runs only
  long evaluator_state_solves = 0;   // heat runs only
};

// Streaming history file: header on open, one row per append, flushed so a
// crash leaves everything written so far.
class HistoryWriter {
 public:
  HistoryWriter(const std::filesystem::path& path, double f_initial);
  void append(const IterationRecord& row);

  static std::string header();
  static std::string format_row(const IterationRecord& row, double f_initial);

 private:
  std::ofstream out_;
  double f_initial_;
};

// One-shot rewrite of a full report history.
void write_history(const RunReport& report, const std::filesystem::path& path);

// Builds the configured problem, runs the solver, writes history.csv,
// config_resolved.txt and (for heat runs) design/state field dumps.
RunReport run_experiment(const ExperimentConfig& cfg);

struct ProjectionBenchResult {
  std::size_t n = 0;
  int trials = 0;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  double mean_brent_iterations = 0.0;
  int max_brent_iterations = 0;
  double max_feasibility_residual = 0.0;  // scaled by 1/(||a|| ||y|| + |b|)
};

// Random projection instances at size n; reports wall time and Brent
// iteration statistics.
ProjectionBenchResult projection_bench(std::size_t n, int trials, std::uint64_t seed);

struct CorpusRow {
  int instance = 0;
  SolveStatus status = SolveStatus::kMaxIterations;
  int iterations = 0;
  double f_final = 0.0;
  double d1_inf = 0.0;
  double feasibility_residual = 0.0;
};

// Solves `count` random quadratic instances of size n; deterministic in seed.
std::vector<CorpusRow> run_quadratic_corpus(int n, int count, std::uint64_t seed,
                                            const SolverConfig& solver_cfg,
                                            double condition = 25.0);

void write_corpus_csv(const std::vector<CorpusRow>& rows,
                      const std::filesystem::path& path);

}  // namespace pcbb
