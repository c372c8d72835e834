#include "pcbb/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "pcbb/kernels.hpp"

namespace pcbb {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIterations: return "max_iter";
    case SolveStatus::kLineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

std::vector<double> spectral_direction(std::span<const double> x,
                                       std::span<const double> g, double alpha_bar,
                                       const KnapsackSet& set) {
  const std::size_t n = set.size();
  std::vector<double> trial(n), d(n);
  kernels::combine_clamped(x, -alpha_bar, g, {}, {}, trial);
  project_into(trial, set, d);
  for (std::size_t i = 0; i < n; ++i) d[i] -= x[i];
  return d;
}

double stationarity(std::span<const double> x, std::span<const double> g,
                    const KnapsackSet& set) {
  const std::size_t n = set.size();
  std::vector<double> trial(n), proj(n);
  kernels::combine_clamped(x, -1.0, g, {}, {}, trial);
  project_into(trial, set, proj);
  return kernels::diff_inf_norm(proj, x);
}

namespace {

// trial = x - g; proj = P[trial]; returns (||proj - x||_inf, ||proj - x||_2)
std::pair<double, double> stationarity_into(std::span<const double> x,
                                            std::span<const double> g,
                                            const KnapsackSet& set,
                                            std::span<double> trial,
                                            std::span<double> proj) {
  kernels::combine_clamped(x, -1.0, g, {}, {}, trial);
  project_into(trial, set, proj);
  const double inf = kernels::diff_inf_norm(proj, x);
  const double two = std::sqrt(kernels::diff_dot_self(proj, x));
  return {inf, two};
}

}  // namespace

SolveResult solve(Objective& obj, const KnapsackSet& set, std::span<const double> x0,
                  const SolverConfig& cfg, const IterationObserver& observer,
                  const RecordSink& record_sink) {
  cfg.validate();
  const std::size_t n = set.size();
  if (obj.dimension() != n) {
    throw std::invalid_argument("solve: objective dimension does not match the set");
  }
  if (x0.size() != n) {
    throw std::invalid_argument("solve: starting point dimension does not match the set");
  }

  // Fixed working set: six n-vectors, no per-iteration allocation.
  std::vector<double> x(n), g(n), d(n), xt(n), gnew(n), trial(n);

  project_into(x0, set, x);
  double f = obj.value_and_gradient(x, g);
  if (!std::isfinite(f)) {
    throw std::runtime_error("solve: objective is non-finite at the starting point");
  }
  long f_evals = 1;
  long g_evals = 1;

  ReferenceState ref = init_reference(f, cfg);

  auto [d1_inf, d1_two] = stationarity_into(x, g, set, trial, xt);
  double alpha0 = 1.0;
  const double init_norm =
      cfg.initial_alpha_norm == InitialAlphaNorm::kInfinity ? d1_inf : d1_two;
  if (init_norm > 0.0) alpha0 = 1.0 / init_norm;
  CbbState cbb = make_cbb_state(alpha0, cfg);

  SolveResult result;
  result.resolved_decrease_delta = ref.decrease_delta;
  auto record = [&](const IterationRecord& row) {
    result.history.push_back(row);
    if (record_sink) record_sink(row);
  };
  record({0, f, d1_inf, 0.0, cbb.alpha_bar, f_evals, g_evals});

  result.status = SolveStatus::kMaxIterations;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    if (d1_inf <= cfg.epsilon) {
      result.status = SolveStatus::kConverged;
      break;
    }
    const double alpha_used = cbb.alpha_bar;

    // d = P[x - alpha*g] - x
    kernels::combine_clamped(x, -alpha_used, g, {}, {}, trial);
    project_into(trial, set, d);
    for (std::size_t i = 0; i < n; ++i) d[i] -= x[i];

    const double gtd = kernels::dot(g, d);
    if (!(gtd < 0.0)) {
      // includes d = 0 with the stationarity test not yet satisfied
      result.status = SolveStatus::kLineSearchFailure;
      break;
    }

    const double f_R = select_fR(ref, cbb.reuse_count);
    const LineSearchResult ls = nonmonotone_armijo(
        [&obj](std::span<const double> p) { return obj.value(p); }, x, d, gtd, f_R, cfg,
        xt, set.lower(), set.upper());
    f_evals += ls.trial_evals;
    if (!ls.ok) {
      result.status = SolveStatus::kLineSearchFailure;
      break;
    }
    const double beta = ls.beta;
    const double f_new = ls.f_new;

    // gradient at the accepted point (xt holds the accepted trial)
    obj.value_and_gradient(xt, gnew);
    ++g_evals;

    // curvature statistics without materializing s and y: s = beta*d
    PairStats stats;
    const double dd = kernels::dot(d, d);
    const double d_dot_y = kernels::dot(d, gnew) - gtd;
    stats.ss = beta * beta * dd;
    stats.sty = beta * d_dot_y;
    stats.yy = kernels::diff_dot_self(gnew, g);

    record_step_kind(ref, beta);
    update_reference(ref, f_new, cfg);

    const double x_inf = kernels::inf_norm(x);
    const CbbState cbb_next =
        cbb_update(cbb, stats, beta, d, g, x_inf, d1_inf, cfg);

    if (observer) {
      IterationEvent ev;
      ev.k = k;
      ev.x_before = x;
      ev.g_before = g;
      ev.d = d;
      ev.x_after = xt;
      ev.alpha_used = alpha_used;
      ev.f_before = f;
      ev.f_R = f_R;
      ev.gtd = gtd;
      ev.beta = beta;
      ev.f_new = f_new;
      ev.sty = stats.sty;
      ev.alpha_next = cbb_next.alpha_bar;
      ev.reference = &ref;
      ev.cbb = &cbb_next;
      observer(ev);
    }

    std::swap(x, xt);
    std::swap(g, gnew);
    f = f_new;
    cbb = cbb_next;

    std::tie(d1_inf, d1_two) = stationarity_into(x, g, set, trial, xt);
    record({k, f, d1_inf, beta, alpha_used, f_evals, g_evals});
  }

  if (result.status == SolveStatus::kMaxIterations && d1_inf <= cfg.epsilon) {
    result.status = SolveStatus::kConverged;
  }
  result.x = std::move(x);
  return result;
}

}  // namespace pcbb
