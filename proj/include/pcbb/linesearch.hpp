#pragma once

// Adaptive nonmonotone reference values and the backtracking Armijo search.
//
// The reference f_ref may sit above the current objective value, letting the
// raw BB step through most of the time. The controller tracks the best value
// within a tolerance Delta (f_min), the largest value since that best was
// set (f_maxmin), and a window of recent values (for f_max), and periodically
// tightens or relaxes f_ref from these; f(x_k) <= f_ref is maintained
// throughout, which keeps the backtracking search finite.

#include <functional>
#include <span>
#include <vector>

#include "pcbb/solver_config.hpp"

namespace pcbb {

struct ReferenceState {
  double f_ref = 0.0;     // reference value f^r
  double f_min = 0.0;     // best value seen, tracked within Delta
  double f_maxmin = 0.0;  // max value since the last new minimum
  std::vector<double> recent;  // ring buffer of the last <= M values
  int recent_head = 0;
  int recent_count = 0;
  int unit_step_streak = 0;   // a: consecutive accepted full steps
  int since_decrease = 0;     // l: iterations since the last Delta-decrease
  double decrease_delta = 0;  // resolved Delta
};

// Start-of-run state: every reference field equals f0, counters zero.
// Resolves Delta = max(1e-12, 1e-6*|f0|) when cfg.decrease_delta is 0.
// Throws std::invalid_argument on non-finite f0.
ReferenceState init_reference(double f0, const SolverConfig& cfg);

// Max of the stored recent values (f^max).
double max_recent(const ReferenceState& state);

// End-of-iteration absorption of the newly accepted value: pushes it into
// the recent window, runs the Delta-decrease bookkeeping (reset or grow
// f_min/f_maxmin and the l counter), then recomputes f_ref for the next
// iteration. Monotone / max-window modes override f_ref accordingly.
void update_reference(ReferenceState& state, double f_new, const SolverConfig& cfg);

// a-counter bookkeeping: increments on a full step, resets otherwise.
void record_step_kind(ReferenceState& state, double beta);

// Reference actually used by the line search: f_ref on the first iterate of
// a stepsize cycle (cycle_pos = 0), min{f_ref, f_max} afterwards.
double select_fR(const ReferenceState& state, int cycle_pos);

struct LineSearchResult {
  double beta = 1.0;    // accepted step fraction eta^j
  int trial_evals = 0;  // objective evaluations consumed (j+1)
  double f_new = 0.0;   // objective at the accepted point
  bool ok = true;       // false when the backtrack cap was hit
};

using FunctionEval = std::function<double(std::span<const double>)>;

// Largest beta = eta^j with f(clamp(x + beta*d)) <= f_R + beta*delta*g'd.
// Requires g'd < 0 and f(x) <= f_R. The accepted trial point is left in
// `trial`. Bounds may be empty (no clamping). A full step costs exactly one
// evaluation. Hitting cfg.max_backtracks sets ok = false.
LineSearchResult nonmonotone_armijo(const FunctionEval& f, std::span<const double> x,
                                    std::span<const double> d, double gtd, double f_R,
                                    const SolverConfig& cfg, std::span<double> trial,
                                    std::span<const double> lower = {},
                                    std::span<const double> upper = {});

}  // namespace pcbb
