#pragma once

// Independent oracles used by the unit and acceptance suites. None of these
// share code with the library paths they check: the projection oracle
// enumerates dual breakpoints instead of root-finding, the QP oracle
// enumerates active sets, and the root oracle is plain bisection.

#include <functional>
#include <span>
#include <vector>

#include "pcbb/knapsack.hpp"
#include "pcbb/solver_config.hpp"

namespace pcbb::oracle {

// Exact knapsack projection by enumerating the 2n breakpoints of the dual
// and solving each linear segment. O(n^2 log n); intended for small n.
std::vector<double> project_by_enumeration(std::span<const double> x,
                                           const KnapsackSet& set);

// Global minimizer of 1/2 x'Ax - q'x over the knapsack set by brute-force
// enumeration of the 3^n lower/free/upper assignments with a KKT check.
std::vector<double> quadratic_active_set_solve(std::span<const double> a_matrix,
                                               std::span<const double> q,
                                               const KnapsackSet& set);

// Plain bisection to |hi-lo| <= tol; returns the midpoint and the count of
// function evaluations after the initial bracketing pair.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol, int* iterations = nullptr);

// Classic monotone Armijo backtracking (reference value f(x)); returns the
// accepted step fraction.
double monotone_armijo_beta(const std::function<double(std::span<const double>)>& f,
                            std::span<const double> x, std::span<const double> d,
                            double gtd, double delta, double eta, int max_backtracks);

// Solves the square system M y = r in place by partial-pivoting elimination.
std::vector<double> dense_solve(std::vector<double> m, std::vector<double> r);

}  // namespace pcbb::oracle
