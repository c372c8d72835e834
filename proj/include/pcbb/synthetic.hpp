#pragma once

// Deterministic synthetic problem corpora: random knapsack instances for the
// projection benchmark and random strongly convex quadratics with knapsack
// constraints for the solver corpus. Identical seeds give identical streams.

#include <cstdint>
#include <span>
#include <vector>

#include "pcbb/knapsack.hpp"
#include "pcbb/rng.hpp"
#include "pcbb/solver.hpp"

namespace pcbb {

struct KnapsackInstance {
  KnapsackSet set;
  std::vector<double> x;  // point to project (generally infeasible)
};

KnapsackInstance random_knapsack_instance(std::size_t n, Rng& rng);

// f(x) = 1/2 x'A x - q'x with dense SPD A.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::vector<double> a_matrix, std::vector<double> q);

  std::size_t dimension() const override { return q_.size(); }
  double value(std::span<const double> x) override;
  double value_and_gradient(std::span<const double> x, std::span<double> grad) override;

  const std::vector<double>& matrix() const { return a_; }
  const std::vector<double>& linear_term() const { return q_; }

 private:
  std::vector<double> a_;  // row-major n x n
  std::vector<double> q_;
  std::vector<double> scratch_;
};

struct QuadraticInstance {
  QuadraticObjective objective;
  KnapsackSet set;
  std::vector<double> x0;
};

// SPD matrix built as Q diag(spectrum) Q' with a random orthogonal Q;
// eigenvalues log-uniform in [1/sqrt(cond), sqrt(cond)].
QuadraticInstance random_quadratic_instance(std::size_t n, Rng& rng,
                                            double condition = 25.0);

}  // namespace pcbb
