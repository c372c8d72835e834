#pragma once

// Projected cyclic Barzilai-Borwein solver for min f(x) over the continuous
// knapsack set. Iterates follow x_{k+1} = x_k + beta_k d_k with the spectral
// projected direction d_k = P[x_k - alpha_k g_k] - x_k, a nonmonotone Armijo
// backtracking on beta, and cyclic reuse of the safeguarded BB stepsize.

#include <functional>
#include <span>
#include <vector>

#include "pcbb/knapsack.hpp"
#include "pcbb/linesearch.hpp"
#include "pcbb/solver_config.hpp"
#include "pcbb/stepsize.hpp"

namespace pcbb {

enum class SolveStatus { kConverged, kMaxIterations, kLineSearchFailure };

const char* to_string(SolveStatus status);

struct IterationRecord {
  int k = 0;
  double f = 0.0;
  double d1_inf = 0.0;     // ||P[x-g]-x||_inf at the recorded iterate
  double beta = 0.0;       // accepted step fraction (0 for the initial row)
  double alpha_bar = 0.0;  // stepsize used by this iteration
  long f_evals = 0;        // cumulative objective evaluations
  long g_evals = 0;        // cumulative gradient evaluations
};

struct SolveResult {
  std::vector<double> x;
  std::vector<IterationRecord> history;  // row 0 is the initial state
  SolveStatus status = SolveStatus::kMaxIterations;
  double resolved_decrease_delta = 0.0;
};

// Objective evaluator contract: deterministic f and gradient of matching
// dimension. value() may be called at line-search trial points; the gradient
// is requested once per accepted iterate.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> x) = 0;
  virtual double value_and_gradient(std::span<const double> x, std::span<double> grad) = 0;
};

// Per-iteration snapshot handed to an observer; spans alias solver buffers
// and are only valid during the callback.
struct IterationEvent {
  int k = 0;
  std::span<const double> x_before;
  std::span<const double> g_before;
  std::span<const double> d;
  std::span<const double> x_after;
  double alpha_used = 0.0;
  double f_before = 0.0;
  double f_R = 0.0;
  double gtd = 0.0;
  double beta = 0.0;
  double f_new = 0.0;
  double sty = 0.0;
  double alpha_next = 0.0;
  const ReferenceState* reference = nullptr;  // state after this iteration's update
  const CbbState* cbb = nullptr;              // state after this iteration's update
};

using IterationObserver = std::function<void(const IterationEvent&)>;
using RecordSink = std::function<void(const IterationRecord&)>;

// d(alpha) = P[x - alpha*g] - x
std::vector<double> spectral_direction(std::span<const double> x,
                                       std::span<const double> g, double alpha_bar,
                                       const KnapsackSet& set);

// ||P[x - g] - x||_inf, zero exactly at constrained stationary points.
double stationarity(std::span<const double> x, std::span<const double> g,
                    const KnapsackSet& set);

// Runs the main loop from x0 (projected onto the set first). The observer,
// when given, fires once per completed iteration; the record sink receives
// every history row as it is produced, the initial row included.
SolveResult solve(Objective& obj, const KnapsackSet& set, std::span<const double> x0,
                  const SolverConfig& cfg, const IterationObserver& observer = {},
                  const RecordSink& record_sink = {});

}  // namespace pcbb
