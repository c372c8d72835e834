#pragma once

// Barzilai-Borwein stepsizes and the safeguarded cyclic-reuse controller.
// One BB stepsize is reused for up to m iterations; a recompute is forced
// when the projection or the line search truncated the step, when the reuse
// budget is exhausted, or when s and y become nearly parallel. Negative
// curvature (s'y <= 0) keeps the current stepsize unless it has persisted
// past 1.5 cycles, in which case a deliberately large tentative step is taken.

#include <span>

#include "pcbb/solver_config.hpp"

namespace pcbb {

// Displacement / gradient-difference pair (s = x_k - x_{k-1}, y = g_k - g_{k-1}).
struct StepPair {
  std::span<const double> s;
  std::span<const double> y;
};

// The inner products the CBB controller actually consumes. The solver forms
// these on the fly (s is just beta*d), avoiding two extra n-vectors.
struct PairStats {
  double ss = 0.0;   // s's
  double sty = 0.0;  // s'y
  double yy = 0.0;   // y'y

  static PairStats from(const StepPair& pair);
};

// s's / s'y; throws std::domain_error when s'y = 0 (stepsize undefined).
double bb_step(const StepPair& pair);
double bb_step(double ss, double sty);

// s'y / y'y; throws std::domain_error when y = 0.
double bb2_step(const StepPair& pair);
double bb2_step(double sty, double yy);

// min{alpha_max, max{alpha_min, alpha}}
double safeguard(double alpha, double alpha_min, double alpha_max);

struct CbbState {
  double alpha_bar = 1.0;      // current safeguarded stepsize
  int reuse_count = 0;         // j: accepted full steps since the last recompute
  bool recompute_flag = false; // truncation seen this iteration
  int cycle_length = 4;        // m
  double parallel_threshold = 0.975;  // theta
};

// Initial controller state (iteration 0): flag set so the first update
// always recomputes, alpha0 already safeguarded.
CbbState make_cbb_state(double alpha0, const SolverConfig& cfg);

// End-of-iteration update: flags projection truncation (some 0<|d_i|<alpha|g_i|)
// and line-search truncation (beta<1), counts reuses, and recomputes the
// stepsize when required. x_inf_norm = ||x_k||_inf and d1_inf_norm =
// ||P[x_k - g_k] - x_k||_inf feed the large tentative step.
CbbState cbb_update(const CbbState& state, const PairStats& stats, double beta,
                    std::span<const double> d, std::span<const double> g,
                    double x_inf_norm, double d1_inf_norm, const SolverConfig& cfg);

// Convenience overload taking the raw pair and the iterate.
CbbState cbb_update(const CbbState& state, const StepPair& pair, double beta,
                    std::span<const double> d, std::span<const double> g,
                    std::span<const double> x, double d1_inf_norm,
                    const SolverConfig& cfg);

}  // namespace pcbb
