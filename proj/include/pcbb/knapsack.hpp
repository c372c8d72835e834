#pragma once

// Exact Euclidean projection onto the continuous knapsack set
//   D = { x : a'x = b, l <= x <= u },  a_i > 0.
//
// The projection is recovered from the Lagrange multiplier of the single
// linear constraint: z(lambda) = clamp(x - lambda*a, l, u) solves the box
// part in closed form, and the multiplier is the unique root of the
// piecewise-linear non-increasing dual residual g(lambda) = a'z(lambda) - b.
// Brent's method locates the root; a final exact solve of the active linear
// piece then pins the equality constraint down to rounding error.

#include <cstddef>
#include <span>
#include <vector>

#include "pcbb/brent.hpp"

namespace pcbb {

class KnapsackSet {
 public:
  // Throws std::invalid_argument unless a_i > 0, l_i <= u_i for all i and
  // a'l <= b <= a'u (the set is non-empty).
  KnapsackSet(std::vector<double> a, double b, std::vector<double> l,
              std::vector<double> u);

  std::size_t size() const { return a_.size(); }
  const std::vector<double>& weights() const { return a_; }
  double target() const { return b_; }
  const std::vector<double>& lower() const { return l_; }
  const std::vector<double>& upper() const { return u_; }
  double weighted_lower() const { return a_dot_l_; }  // a'l
  double weighted_upper() const { return a_dot_u_; }  // a'u

 private:
  std::vector<double> a_;
  double b_;
  std::vector<double> l_;
  std::vector<double> u_;
  double a_dot_l_ = 0.0;
  double a_dot_u_ = 0.0;
};

// z(lambda) = clamp(x - lambda*a, l, u), componentwise.
std::vector<double> z_of_lambda(double lambda, std::span<const double> x,
                                const KnapsackSet& set);
void z_of_lambda_into(double lambda, std::span<const double> x, const KnapsackSet& set,
                      std::span<double> out);

// g(lambda) = a'z(lambda) - b. Continuous, piecewise linear, non-increasing.
double dual_residual(double lambda, std::span<const double> x, const KnapsackSet& set);

// [min_i (x_i-u_i)/a_i, max_i (x_i-l_i)/a_i]; always contains the dual root.
DualBracket dual_bracket(std::span<const double> x, const KnapsackSet& set);

struct ProjectionInfo {
  double lambda = 0.0;
  int brent_iterations = 0;
  int polish_steps = 0;
};

// Euclidean projection of x onto the set. Bounds hold exactly (clamped);
// |a'y - b| stays at the rounding level of the dot products involved.
std::vector<double> project(std::span<const double> x, const KnapsackSet& set,
                            ProjectionInfo* info = nullptr);
void project_into(std::span<const double> x, const KnapsackSet& set,
                  std::span<double> out, ProjectionInfo* info = nullptr);

}  // namespace pcbb
