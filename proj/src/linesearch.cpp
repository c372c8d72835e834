#include "pcbb/linesearch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pcbb/kernels.hpp"

namespace pcbb {

namespace {

void push_recent(ReferenceState& state, double f, int window) {
  if (static_cast<int>(state.recent.size()) < window) {
    state.recent.resize(static_cast<std::size_t>(window), 0.0);
  }
  state.recent[static_cast<std::size_t>(state.recent_head)] = f;
  state.recent_head = (state.recent_head + 1) % window;
  if (state.recent_count < window) ++state.recent_count;
}

// Delta-decrease bookkeeping with the newly accepted value.
void apply_decrease_bookkeeping(ReferenceState& state, double f_new) {
  if (f_new <= state.f_min - state.decrease_delta) {
    state.f_maxmin = f_new;
    state.f_min = f_new;
    state.since_decrease = 0;
  } else {
    ++state.since_decrease;
    state.f_maxmin = std::max(state.f_maxmin, f_new);
  }
}

// Reference update given the current objective value. Ratio tests with a
// zero denominator count as satisfied: no spread means the max-type choice
// is the conservative one.
void recompute_reference(ReferenceState& state, double f_current,
                         const SolverConfig& cfg) {
  const double f_max = max_recent(state);
  if (state.since_decrease == cfg.reference_reset_interval) {
    state.since_decrease = 0;
    const double denom = state.f_maxmin - state.f_min;
    const double spread = f_max - state.f_min;
    const bool ratio_ok = (denom == 0.0) ? true : (spread / denom >= cfg.gamma1);
    state.f_ref = ratio_ok ? state.f_maxmin : f_max;
  } else if (state.unit_step_streak > cfg.unit_step_limit) {
    if (f_max > f_current) {
      const double denom = f_max - f_current;
      const double gain = state.f_ref - f_current;
      const bool ratio_ok = (denom == 0.0) ? true : (gain / denom >= cfg.gamma2);
      if (ratio_ok) state.f_ref = f_max;
    }
    // otherwise keep the previous reference
  }
  // else: keep the previous reference
}

}  // namespace

ReferenceState init_reference(double f0, const SolverConfig& cfg) {
  if (!std::isfinite(f0)) {
    throw std::invalid_argument("init_reference: non-finite initial objective value");
  }
  ReferenceState state;
  state.f_ref = f0;
  state.f_min = f0;
  state.f_maxmin = f0;
  state.decrease_delta = cfg.decrease_delta > 0.0
                             ? cfg.decrease_delta
                             : std::max(1e-12, 1e-6 * std::abs(f0));
  push_recent(state, f0, cfg.history_window);
  return state;
}

double max_recent(const ReferenceState& state) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < state.recent_count; ++i) {
    m = std::max(m, state.recent[static_cast<std::size_t>(i)]);
  }
  return m;
}

void update_reference(ReferenceState& state, double f_new, const SolverConfig& cfg) {
  push_recent(state, f_new, cfg.history_window);
  apply_decrease_bookkeeping(state, f_new);
  recompute_reference(state, f_new, cfg);
  switch (cfg.reference_mode) {
    case ReferenceMode::kAdaptive:
      break;
    case ReferenceMode::kMonotone:
      state.f_ref = f_new;
      break;
    case ReferenceMode::kMaxWindow:
      state.f_ref = max_recent(state);
      break;
  }
}

void record_step_kind(ReferenceState& state, double beta) {
  if (beta == 1.0) {
    ++state.unit_step_streak;
  } else {
    state.unit_step_streak = 0;
  }
}

double select_fR(const ReferenceState& state, int cycle_pos) {
  if (cycle_pos == 0) return state.f_ref;
  return std::min(state.f_ref, max_recent(state));
}

LineSearchResult nonmonotone_armijo(const FunctionEval& f, std::span<const double> x,
                                    std::span<const double> d, double gtd, double f_R,
                                    const SolverConfig& cfg, std::span<double> trial,
                                    std::span<const double> lower,
                                    std::span<const double> upper) {
  LineSearchResult res;
  double beta = 1.0;
  for (int j = 0; j <= cfg.max_backtracks; ++j) {
    kernels::combine_clamped(x, beta, d, lower, upper, trial);
    const double ft = f(trial);
    res.beta = beta;
    res.trial_evals = j + 1;
    res.f_new = ft;
    if (ft <= f_R + beta * cfg.armijo_delta * gtd) {
      res.ok = true;
      return res;
    }
    beta *= cfg.backtrack_eta;
  }
  res.ok = false;
  return res;
}

}  // namespace pcbb
