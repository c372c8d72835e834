#include "pcbb/experiment.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pcbb/fields_io.hpp"
#include "pcbb/kernels.hpp"

namespace pcbb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string mode_to_string(ReferenceMode m) {
  switch (m) {
    case ReferenceMode::kAdaptive: return "adaptive";
    case ReferenceMode::kMonotone: return "monotone";
    case ReferenceMode::kMaxWindow: return "max-window";
  }
  return "adaptive";
}

ReferenceMode mode_from_string(const std::string& s) {
  if (s == "adaptive") return ReferenceMode::kAdaptive;
  if (s == "monotone") return ReferenceMode::kMonotone;
  if (s == "max-window") return ReferenceMode::kMaxWindow;
  throw ConfigError("unknown reference_mode '" + s + "'");
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kHeat2d: return "heat2d";
    case ProblemKind::kHeat3d: return "heat3d";
    case ProblemKind::kQuadratic: return "quadratic";
    case ProblemKind::kProjectionBench: return "projection-bench";
  }
  return "heat2d";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "heat2d") return ProblemKind::kHeat2d;
  if (name == "heat3d") return ProblemKind::kHeat3d;
  if (name == "quadratic") return ProblemKind::kQuadratic;
  if (name == "projection-bench") return ProblemKind::kProjectionBench;
  throw ConfigError("unknown problem kind '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_config(const ConfigMap& map) {
  ExperimentConfig cfg;
  cfg.problem = problem_kind_from_string(
      map.get_string("experiment", "problem", to_string(cfg.problem)));
  cfg.seed_set = map.contains("experiment", "seed");
  cfg.seed = map.get_u64("experiment", "seed", cfg.seed);
  cfg.iterations = static_cast<int>(map.get_long("experiment", "iterations", cfg.iterations));
  cfg.output_dir = map.get_string("experiment", "output_dir", cfg.output_dir);

  cfg.grid_n = static_cast<int>(map.get_long("problem", "grid_n", cfg.grid_n));
  cfg.conductivity_ratio =
      map.get_double("problem", "conductivity_ratio", cfg.conductivity_ratio);
  cfg.penalization = map.get_double("problem", "penalization", cfg.penalization);
  cfg.volume_fraction = map.get_double("problem", "volume_fraction", cfg.volume_fraction);
  cfg.load = map.get_double("problem", "load", cfg.load);
  cfg.theta0 = map.get_double("problem", "theta0", cfg.theta0);
  cfg.pcg_tol = map.get_double("problem", "pcg_tol", cfg.pcg_tol);

  cfg.quad_n = static_cast<int>(map.get_long("quadratic", "n", cfg.quad_n));
  cfg.quad_count = static_cast<int>(map.get_long("quadratic", "count", cfg.quad_count));
  cfg.quad_condition = map.get_double("quadratic", "condition", cfg.quad_condition);

  cfg.bench_n = static_cast<std::size_t>(map.get_long("bench", "n",
                                                      static_cast<long>(cfg.bench_n)));
  cfg.bench_trials = static_cast<int>(map.get_long("bench", "trials", cfg.bench_trials));

  SolverConfig& s = cfg.solver;
  s.epsilon = map.get_double("solver", "epsilon", s.epsilon);
  s.armijo_delta = map.get_double("solver", "delta", s.armijo_delta);
  s.backtrack_eta = map.get_double("solver", "eta", s.backtrack_eta);
  s.alpha_min = map.get_double("solver", "alpha_min", s.alpha_min);
  s.alpha_max = map.get_double("solver", "alpha_max", s.alpha_max);
  s.unit_step_limit = static_cast<int>(map.get_long("solver", "A", s.unit_step_limit));
  s.reference_reset_interval =
      static_cast<int>(map.get_long("solver", "L", s.reference_reset_interval));
  s.history_window = static_cast<int>(map.get_long("solver", "M", s.history_window));
  s.cycle_length = static_cast<int>(map.get_long("solver", "m", s.cycle_length));
  s.gamma1 = map.get_double("solver", "gamma1", s.gamma1);
  s.gamma2 = map.get_double("solver", "gamma2", s.gamma2);
  s.parallel_threshold = map.get_double("solver", "theta", s.parallel_threshold);
  const std::string delta_str = map.get_string("solver", "decrease_delta", "auto");
  s.decrease_delta = (delta_str == "auto") ? 0.0
                                           : map.get_double("solver", "decrease_delta", 0.0);
  s.max_backtracks =
      static_cast<int>(map.get_long("solver", "max_backtracks", s.max_backtracks));
  const std::string nc =
      map.get_string("solver", "negative_curvature_step",
                     s.negative_curvature_step == NegativeCurvatureStep::kLargeTentative
                         ? "t"
                         : "beta");
  if (nc == "t") {
    s.negative_curvature_step = NegativeCurvatureStep::kLargeTentative;
  } else if (nc == "beta") {
    s.negative_curvature_step = NegativeCurvatureStep::kStepFraction;
  } else {
    throw ConfigError("unknown negative_curvature_step '" + nc + "'");
  }
  const std::string norm = map.get_string("solver", "initial_alpha_norm", "inf");
  if (norm == "inf") {
    s.initial_alpha_norm = InitialAlphaNorm::kInfinity;
  } else if (norm == "two") {
    s.initial_alpha_norm = InitialAlphaNorm::kTwo;
  } else {
    throw ConfigError("unknown initial_alpha_norm '" + norm + "'");
  }
  s.reference_mode = mode_from_string(map.get_string("solver", "reference_mode", "adaptive"));

  cfg.validate();
  return cfg;
}

ConfigMap ExperimentConfig::to_config() const {
  ConfigMap map;
  map.set("experiment", "problem", to_string(problem));
  if (seed_set) map.set("experiment", "seed", std::to_string(seed));
  map.set("experiment", "iterations", std::to_string(iterations));
  map.set("experiment", "output_dir", output_dir);

  map.set("problem", "grid_n", std::to_string(grid_n));
  map.set("problem", "conductivity_ratio", format_double(conductivity_ratio));
  map.set("problem", "penalization", format_double(penalization));
  map.set("problem", "volume_fraction", format_double(volume_fraction));
  map.set("problem", "load", format_double(load));
  map.set("problem", "theta0", format_double(theta0));
  map.set("problem", "pcg_tol", format_double(pcg_tol));

  map.set("quadratic", "n", std::to_string(quad_n));
  map.set("quadratic", "count", std::to_string(quad_count));
  map.set("quadratic", "condition", format_double(quad_condition));

  map.set("bench", "n", std::to_string(bench_n));
  map.set("bench", "trials", std::to_string(bench_trials));

  map.set("solver", "epsilon", format_double(solver.epsilon));
  map.set("solver", "delta", format_double(solver.armijo_delta));
  map.set("solver", "eta", format_double(solver.backtrack_eta));
  map.set("solver", "alpha_min", format_double(solver.alpha_min));
  map.set("solver", "alpha_max", format_double(solver.alpha_max));
  map.set("solver", "A", std::to_string(solver.unit_step_limit));
  map.set("solver", "L", std::to_string(solver.reference_reset_interval));
  map.set("solver", "M", std::to_string(solver.history_window));
  map.set("solver", "m", std::to_string(solver.cycle_length));
  map.set("solver", "gamma1", format_double(solver.gamma1));
  map.set("solver", "gamma2", format_double(solver.gamma2));
  map.set("solver", "theta", format_double(solver.parallel_threshold));
  map.set("solver", "decrease_delta",
          solver.decrease_delta > 0.0 ? format_double(solver.decrease_delta) : "auto");
  map.set("solver", "max_backtracks", std::to_string(solver.max_backtracks));
  map.set("solver", "negative_curvature_step",
          solver.negative_curvature_step == NegativeCurvatureStep::kLargeTentative
              ? "t"
              : "beta");
  map.set("solver", "initial_alpha_norm",
          solver.initial_alpha_norm == InitialAlphaNorm::kInfinity ? "inf" : "two");
  map.set("solver", "reference_mode", mode_to_string(solver.reference_mode));
  return map;
}

void ExperimentConfig::validate() const {
  try {
    solver.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("[solver] ") + e.what());
  }
  if (iterations < 0) throw ConfigError("[experiment] iterations must be >= 0");
  if (problem == ProblemKind::kHeat2d || problem == ProblemKind::kHeat3d) {
    if (grid_n < 2) throw ConfigError("[problem] grid_n must be >= 2");
    if (!(conductivity_ratio > 1.0)) {
      throw ConfigError("[problem] conductivity_ratio must exceed 1");
    }
    if (!(penalization >= 1.0)) throw ConfigError("[problem] penalization must be >= 1");
    if (!(volume_fraction > 0.0 && volume_fraction < 1.0)) {
      throw ConfigError("[problem] volume_fraction must lie in (0,1)");
    }
    if (!(pcg_tol > 0.0)) throw ConfigError("[problem] pcg_tol must be positive");
  }
  if (problem == ProblemKind::kQuadratic) {
    if (quad_n < 1) throw ConfigError("[quadratic] n must be >= 1");
    if (quad_count < 1) throw ConfigError("[quadratic] count must be >= 1");
    if (!seed_set) throw ConfigError("[experiment] seed is required for synthetic corpora");
  }
  if (problem == ProblemKind::kProjectionBench) {
    if (bench_n < 1) throw ConfigError("[bench] n must be >= 1");
    if (bench_trials < 1) throw ConfigError("[bench] trials must be >= 1");
    if (!seed_set) throw ConfigError("[experiment] seed is required for synthetic corpora");
  }
}

std::string HistoryWriter::header() {
  return "iter,f,d1_inf,beta,alpha_bar,f_evals,g_evals,f_scaled";
}

std::string HistoryWriter::format_row(const IterationRecord& row, double f_initial) {
  std::ostringstream os;
  const double scaled = f_initial != 0.0 ? row.f / f_initial : row.f;
  os << row.k << ',' << format_double(row.f) << ',' << format_double(row.d1_inf) << ','
     << format_double(row.beta) << ',' << format_double(row.alpha_bar) << ','
     << row.f_evals << ',' << row.g_evals << ',' << format_double(scaled);
  return os.str();
}

HistoryWriter::HistoryWriter(const std::filesystem::path& path, double f_initial)
    : f_initial_(f_initial) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  out_.open(path);
  if (!out_) throw std::runtime_error("cannot open history file: " + path.string());
  out_ << header() << '\n';
  out_.flush();
}

void HistoryWriter::append(const IterationRecord& row) {
  out_ << format_row(row, f_initial_) << '\n';
  out_.flush();
}

void write_history(const RunReport& report, const std::filesystem::path& path) {
  HistoryWriter writer(path, report.f_initial);
  for (const auto& row : report.history) writer.append(row);
}

namespace {

RunReport run_heat(const ExperimentConfig& cfg) {
  const auto t_setup = Clock::now();
  const int dim = cfg.problem == ProblemKind::kHeat3d ? 3 : 2;
  HeatProblem prob = HeatProblem::uniform(dim, cfg.grid_n, 1.0, cfg.conductivity_ratio,
                                          cfg.penalization, cfg.volume_fraction, cfg.load,
                                          cfg.theta0);
  HeatObjective obj(prob, cfg.pcg_tol);
  const KnapsackSet set = design_set(prob);
  std::vector<double> w0(prob.grid.cell_count(), cfg.volume_fraction);

  SolverConfig solver_cfg = cfg.solver;
  solver_cfg.max_iterations = cfg.iterations;

  RunReport report;
  report.timings.setup_seconds = seconds_since(t_setup);

  const std::filesystem::path out_dir(cfg.output_dir);
  std::optional<HistoryWriter> writer;

  const auto t_solve = Clock::now();
  bool header_written = false;
  SolveResult result =
      solve(obj, set, w0, solver_cfg, {}, [&](const IterationRecord& row) {
        if (!header_written) {
          // f_initial is only known once the first record arrives
          writer.emplace(out_dir / "history.csv", row.f);
          report.f_initial = row.f;
          header_written = true;
        }
        writer->append(row);
      });
  report.timings.solve_seconds = seconds_since(t_solve);

  const auto t_io = Clock::now();
  report.history = std::move(result.history);
  report.status = result.status;
  report.design_final = std::move(result.x);
  report.state_final = obj.last_state();
  report.evaluator_state_solves = obj.state_solves();

  write_field_csv(out_dir / "design_final.csv", prob.grid, report.design_final);
  write_field_vtk(out_dir / "design_final.vtk", prob.grid, report.design_final, "design");
  write_field_csv(out_dir / "state_final.csv", prob.grid, report.state_final);
  write_field_vtk(out_dir / "state_final.vtk", prob.grid, report.state_final, "state");
  cfg.to_config().save(out_dir / "config_resolved.txt");
  report.timings.io_seconds = seconds_since(t_io);
  return report;
}

RunReport run_quadratic(const ExperimentConfig& cfg) {
  const auto t_setup = Clock::now();
  Rng rng(cfg.seed);
  QuadraticInstance inst =
      random_quadratic_instance(static_cast<std::size_t>(cfg.quad_n), rng,
                                cfg.quad_condition);
  SolverConfig solver_cfg = cfg.solver;
  solver_cfg.max_iterations = cfg.iterations;

  RunReport report;
  report.timings.setup_seconds = seconds_since(t_setup);

  const std::filesystem::path out_dir(cfg.output_dir);
  std::optional<HistoryWriter> writer;
  bool header_written = false;

  const auto t_solve = Clock::now();
  SolveResult result = solve(inst.objective, inst.set, inst.x0, solver_cfg, {},
                             [&](const IterationRecord& row) {
                               if (!header_written) {
                                 writer.emplace(out_dir / "history.csv", row.f);
                                 report.f_initial = row.f;
                                 header_written = true;
                               }
                               writer->append(row);
                             });
  report.timings.solve_seconds = seconds_since(t_solve);

  const auto t_io = Clock::now();
  report.history = std::move(result.history);
  report.status = result.status;
  report.design_final = std::move(result.x);

  std::ofstream sol(out_dir / "design_final.csv");
  if (!sol) throw std::runtime_error("cannot write design_final.csv");
  sol << "i,value\n";
  for (std::size_t i = 0; i < report.design_final.size(); ++i) {
    sol << i << ',' << format_double(report.design_final[i]) << '\n';
  }
  cfg.to_config().save(out_dir / "config_resolved.txt");
  report.timings.io_seconds = seconds_since(t_io);
  return report;
}

RunReport run_bench(const ExperimentConfig& cfg) {
  RunReport report;
  const auto t_solve = Clock::now();
  const ProjectionBenchResult bench =
      projection_bench(cfg.bench_n, cfg.bench_trials, cfg.seed);
  report.timings.solve_seconds = seconds_since(t_solve);

  const std::filesystem::path out_dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream out(out_dir / "projection_bench.csv");
  if (!out) throw std::runtime_error("cannot write projection_bench.csv");
  out << "n,trials,mean_ms,min_ms,max_ms,mean_brent_iters,max_brent_iters,max_residual\n";
  out << bench.n << ',' << bench.trials << ',' << format_double(bench.mean_ms) << ','
      << format_double(bench.min_ms) << ',' << format_double(bench.max_ms) << ','
      << format_double(bench.mean_brent_iterations) << ',' << bench.max_brent_iterations
      << ',' << format_double(bench.max_feasibility_residual) << '\n';
  cfg.to_config().save(out_dir / "config_resolved.txt");
  report.status = SolveStatus::kConverged;
  return report;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.problem) {
    case ProblemKind::kHeat2d:
    case ProblemKind::kHeat3d:
      return run_heat(cfg);
    case ProblemKind::kQuadratic:
      return run_quadratic(cfg);
    case ProblemKind::kProjectionBench:
      return run_bench(cfg);
  }
  throw std::logic_error("run_experiment: unhandled problem kind");
}

ProjectionBenchResult projection_bench(std::size_t n, int trials, std::uint64_t seed) {
  if (n < 1 || trials < 1) {
    throw std::invalid_argument("projection_bench: need n >= 1 and trials >= 1");
  }
  Rng rng(seed);
  ProjectionBenchResult res;
  res.n = n;
  res.trials = trials;
  res.min_ms = std::numeric_limits<double>::infinity();

  double total_ms = 0.0;
  double total_brent = 0.0;
  std::vector<double> y(n);
  for (int t = 0; t < trials; ++t) {
    KnapsackInstance inst = random_knapsack_instance(n, rng);
    ProjectionInfo info;
    const auto t0 = Clock::now();
    project_into(inst.x, inst.set, y, &info);
    const double ms = seconds_since(t0) * 1e3;
    total_ms += ms;
    res.min_ms = std::min(res.min_ms, ms);
    res.max_ms = std::max(res.max_ms, ms);
    total_brent += info.brent_iterations;
    res.max_brent_iterations = std::max(res.max_brent_iterations, info.brent_iterations);

    const double residual =
        std::abs(kernels::dot(inst.set.weights(), y) - inst.set.target());
    const double scale =
        std::sqrt(kernels::dot(inst.set.weights(), inst.set.weights())) *
            std::sqrt(kernels::dot(y, y)) +
        std::abs(inst.set.target());
    res.max_feasibility_residual =
        std::max(res.max_feasibility_residual, residual / (scale > 0.0 ? scale : 1.0));
  }
  res.mean_ms = total_ms / trials;
  res.mean_brent_iterations = total_brent / trials;
  return res;
}

std::vector<CorpusRow> run_quadratic_corpus(int n, int count, std::uint64_t seed,
                                            const SolverConfig& solver_cfg,
                                            double condition) {
  std::vector<CorpusRow> rows;
  rows.reserve(static_cast<std::size_t>(count));
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    QuadraticInstance inst =
        random_quadratic_instance(static_cast<std::size_t>(n), rng, condition);
    const SolveResult result = solve(inst.objective, inst.set, inst.x0, solver_cfg);
    CorpusRow row;
    row.instance = i;
    row.status = result.status;
    row.iterations = result.history.empty() ? 0 : result.history.back().k;
    row.f_final = result.history.empty() ? 0.0 : result.history.back().f;
    row.d1_inf = result.history.empty() ? 0.0 : result.history.back().d1_inf;
    row.feasibility_residual =
        std::abs(kernels::dot(inst.set.weights(), result.x) - inst.set.target());
    rows.push_back(row);
  }
  return rows;
}

void write_corpus_csv(const std::vector<CorpusRow>& rows,
                      const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path.string());
  out << "instance,status,iterations,f_final,d1_inf,feasibility_residual\n";
  for (const auto& r : rows) {
    out << r.instance << ',' << to_string(r.status) << ',' << r.iterations << ','
        << format_double(r.f_final) << ',' << format_double(r.d1_inf) << ','
        << format_double(r.feasibility_residual) << '\n';
  }
}

}  // namespace pcbb
