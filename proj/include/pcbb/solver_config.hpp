#pragma once

#include <stdexcept>

namespace pcbb {

// Stepsize to adopt when negative curvature (s'y <= 0) persists past 1.5
// cycle lengths: the large tentative step min{||x||_inf,1}/||d1(x)||_inf, or
// the last accepted step fraction beta.
enum class NegativeCurvatureStep { kLargeTentative, kStepFraction };

// Norm used for the initial stepsize 1/||P[x0 - g0] - x0||.
enum class InitialAlphaNorm { kInfinity, kTwo };

// How the line-search reference value is chosen: the adaptive controller,
// plain monotone (f_ref = f(x_k)), or the max of the recent window.
enum class ReferenceMode { kAdaptive, kMonotone, kMaxWindow };

struct SolverConfig {
  double epsilon = 1e-8;       // stationarity tolerance on ||P[x-g]-x||_inf
  double armijo_delta = 1e-4;  // sufficient-decrease parameter
  double backtrack_eta = 0.5;  // stepsize decay per backtrack
  double alpha_min = 1e-30;
  double alpha_max = 1e30;
  int unit_step_limit = 40;           // A: consecutive full steps before a reference review
  int reference_reset_interval = 10;  // L: iterations between forced reference resets
  int history_window = 20;            // M: length of the recent-values window
  int cycle_length = 4;               // m: max reuses of one BB stepsize
  double gamma1 = 2.0;
  double gamma2 = 2.0;
  double parallel_threshold = 0.975;  // cos(s,y) level that forces a recompute
  double decrease_delta = 0.0;        // 0: auto, max(1e-12, 1e-6*|f(x0)|)
  int max_iterations = 1000;
  int max_backtracks = 60;
  NegativeCurvatureStep negative_curvature_step = NegativeCurvatureStep::kLargeTentative;
  InitialAlphaNorm initial_alpha_norm = InitialAlphaNorm::kInfinity;
  ReferenceMode reference_mode = ReferenceMode::kAdaptive;

  void validate() const {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be >= 0");
    if (!(armijo_delta > 0.0 && armijo_delta < 1.0)) {
      throw std::invalid_argument("SolverConfig: delta must lie in (0,1)");
    }
    if (!(backtrack_eta > 0.0 && backtrack_eta < 1.0)) {
      throw std::invalid_argument("SolverConfig: eta must lie in (0,1)");
    }
    if (!(alpha_min > 0.0 && alpha_min <= alpha_max)) {
      throw std::invalid_argument("SolverConfig: need 0 < alpha_min <= alpha_max");
    }
    if (unit_step_limit < 1 || reference_reset_interval < 1 || history_window < 1) {
      throw std::invalid_argument("SolverConfig: A, L, M must be positive");
    }
    if (cycle_length < 1) throw std::invalid_argument("SolverConfig: m must be >= 1");
    if (!(gamma1 > 1.0 && gamma2 > 1.0)) {
      throw std::invalid_argument("SolverConfig: gamma1, gamma2 must exceed 1");
    }
    if (!(parallel_threshold > 0.0 && parallel_threshold < 1.0)) {
      throw std::invalid_argument("SolverConfig: theta must lie in (0,1)");
    }
    if (!(decrease_delta >= 0.0)) {
      throw std::invalid_argument("SolverConfig: Delta must be >= 0 (0 = auto)");
    }
    if (max_iterations < 0) throw std::invalid_argument("SolverConfig: max_iterations < 0");
    if (max_backtracks < 1) throw std::invalid_argument("SolverConfig: max_backtracks < 1");
  }
};

}  // namespace pcbb
