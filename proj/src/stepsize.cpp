#include "pcbb/stepsize.hpp"

#include <cmath>
#include <stdexcept>

#include "pcbb/kernels.hpp"

namespace pcbb {

PairStats PairStats::from(const StepPair& pair) {
  PairStats st;
  st.ss = kernels::dot(pair.s, pair.s);
  st.sty = kernels::dot(pair.s, pair.y);
  st.yy = kernels::dot(pair.y, pair.y);
  return st;
}

double bb_step(double ss, double sty) {
  if (sty == 0.0) throw std::domain_error("bb_step: s'y = 0, stepsize undefined");
  return ss / sty;
}

double bb_step(const StepPair& pair) {
  const PairStats st = PairStats::from(pair);
  return bb_step(st.ss, st.sty);
}

double bb2_step(double sty, double yy) {
  if (yy == 0.0) throw std::domain_error("bb2_step: y = 0, stepsize undefined");
  return sty / yy;
}

double bb2_step(const StepPair& pair) {
  const PairStats st = PairStats::from(pair);
  return bb2_step(st.sty, st.yy);
}

double safeguard(double alpha, double alpha_min, double alpha_max) {
  if (alpha < alpha_min) return alpha_min;
  if (alpha > alpha_max) return alpha_max;
  return alpha;
}

CbbState make_cbb_state(double alpha0, const SolverConfig& cfg) {
  CbbState st;
  st.alpha_bar = safeguard(alpha0, cfg.alpha_min, cfg.alpha_max);
  st.reuse_count = 0;
  st.recompute_flag = true;  // iteration 0 always recomputes afterwards
  st.cycle_length = cfg.cycle_length;
  st.parallel_threshold = cfg.parallel_threshold;
  return st;
}

CbbState cbb_update(const CbbState& state, const PairStats& stats, double beta,
                    std::span<const double> d, std::span<const double> g,
                    double x_inf_norm, double d1_inf_norm, const SolverConfig& cfg) {
  CbbState next = state;

  bool flag = state.recompute_flag;
  // projection truncated the trial step
  if (kernels::any_truncated_component(d, g, state.alpha_bar)) flag = true;
  // line search truncated the step; full steps extend the reuse count
  if (beta == 1.0) {
    next.reuse_count = state.reuse_count + 1;
  } else {
    flag = true;
  }

  double cosine = 0.0;
  const double norms = std::sqrt(stats.ss) * std::sqrt(stats.yy);
  if (norms > 0.0) cosine = stats.sty / norms;

  if (next.reuse_count >= state.cycle_length || flag ||
      cosine >= state.parallel_threshold) {
    if (stats.sty > 0.0) {
      next.alpha_bar =
          safeguard(bb_step(stats.ss, stats.sty), cfg.alpha_min, cfg.alpha_max);
      next.reuse_count = 0;
    } else if (stats.sty < 0.0 &&
               static_cast<double>(next.reuse_count) > 1.5 * state.cycle_length) {
      double trial;
      if (cfg.negative_curvature_step == NegativeCurvatureStep::kLargeTentative &&
          d1_inf_norm > 0.0) {
        trial = (x_inf_norm < 1.0 ? x_inf_norm : 1.0) / d1_inf_norm;
      } else {
        trial = beta;
      }
      next.alpha_bar = safeguard(trial, cfg.alpha_min, cfg.alpha_max);
      next.reuse_count = 0;
    }
    // otherwise (s'y <= 0 without a long stall, or s'y = 0 exactly): keep
    // alpha_bar; zero curvature along s carries no usable information
  }

  next.recompute_flag = false;
  return next;
}

CbbState cbb_update(const CbbState& state, const StepPair& pair, double beta,
                    std::span<const double> d, std::span<const double> g,
                    std::span<const double> x, double d1_inf_norm,
                    const SolverConfig& cfg) {
  return cbb_update(state, PairStats::from(pair), beta, d, g, kernels::inf_norm(x),
                    d1_inf_norm, cfg);
}

}  // namespace pcbb
