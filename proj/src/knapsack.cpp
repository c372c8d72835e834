#include "pcbb/knapsack.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "pcbb/kernels.hpp"

namespace pcbb {

namespace {

void check_dimension(std::size_t set_n, std::size_t x_n) {
  if (set_n != x_n) {
    throw std::invalid_argument("knapsack: vector length " + std::to_string(x_n) +
                                " does not match set dimension " + std::to_string(set_n));
  }
}

}  // namespace

KnapsackSet::KnapsackSet(std::vector<double> a, double b, std::vector<double> l,
                         std::vector<double> u)
    : a_(std::move(a)), b_(b), l_(std::move(l)), u_(std::move(u)) {
  const std::size_t n = a_.size();
  if (n == 0) throw std::invalid_argument("KnapsackSet: empty weight vector");
  if (l_.size() != n || u_.size() != n) {
    throw std::invalid_argument("KnapsackSet: bound vectors must match weight length");
  }
  if (!std::isfinite(b_)) throw std::invalid_argument("KnapsackSet: non-finite target");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a_[i] > 0.0) || !std::isfinite(a_[i])) {
      throw std::invalid_argument("KnapsackSet: weights must be positive and finite");
    }
    if (!(l_[i] <= u_[i])) {
      throw std::invalid_argument("KnapsackSet: lower bound exceeds upper bound at index " +
                                  std::to_string(i));
    }
  }
  a_dot_l_ = kernels::dot(a_, l_);
  a_dot_u_ = kernels::dot(a_, u_);
  if (!(a_dot_l_ <= b_ && b_ <= a_dot_u_)) {
    throw std::invalid_argument("KnapsackSet: empty set, target outside [a'l, a'u]");
  }
}

void z_of_lambda_into(double lambda, std::span<const double> x, const KnapsackSet& set,
                      std::span<double> out) {
  check_dimension(set.size(), x.size());
  check_dimension(set.size(), out.size());
  kernels::clamp_affine(lambda, x, set.weights(), set.lower(), set.upper(), out);
}

std::vector<double> z_of_lambda(double lambda, std::span<const double> x,
                                const KnapsackSet& set) {
  std::vector<double> out(set.size());
  z_of_lambda_into(lambda, x, set, out);
  return out;
}

double dual_residual(double lambda, std::span<const double> x, const KnapsackSet& set) {
  check_dimension(set.size(), x.size());
  return kernels::weighted_clamp_sum(lambda, x, set.weights(), set.lower(), set.upper()) -
         set.target();
}

DualBracket dual_bracket(std::span<const double> x, const KnapsackSet& set) {
  check_dimension(set.size(), x.size());
  DualBracket br;
  kernels::breakpoint_hull(x, set.weights(), set.lower(), set.upper(), br.lambda_min,
                           br.lambda_max);
  return br;
}

void project_into(std::span<const double> x, const KnapsackSet& set, std::span<double> out,
                  ProjectionInfo* info) {
  check_dimension(set.size(), x.size());
  check_dimension(set.size(), out.size());
  ProjectionInfo local;
  const double b = set.target();

  // zero-measure edges: the whole budget sits on one box face
  if (set.weighted_lower() == b) {
    std::copy(set.lower().begin(), set.lower().end(), out.begin());
    if (info) *info = local;
    return;
  }
  if (set.weighted_upper() == b) {
    std::copy(set.upper().begin(), set.upper().end(), out.begin());
    if (info) *info = local;
    return;
  }

  const DualBracket br = dual_bracket(x, set);
  double lambda = br.lambda_min;
  if (br.lambda_min < br.lambda_max) {
    auto g = [&](double lam) { return dual_residual(lam, x, set); };
    const BrentResult root = brent_root(g, br, 1e-14);
    lambda = root.root;
    local.brent_iterations = root.iterations;

    // Brent stops on an interval; the root lies on a known linear piece of
    // g, so resolve that piece exactly. Classifying at the refined multiplier
    // and re-solving once more catches the case where the first classification
    // straddles a breakpoint. Keep the best multiplier by |g|.
    double best_lambda = lambda;
    double best_abs_g = std::abs(root.f_root);
    for (int pass = 0; pass < 2; ++pass) {
      const kernels::PieceSums ps =
          kernels::piece_sums(lambda, x, set.weights(), set.lower(), set.upper());
      if (!(ps.aa_free > 0.0)) break;  // flat piece: g is constant here
      const double refined = (ps.fixed + ps.ax_free - b) / ps.aa_free;
      if (refined == lambda) break;
      const double abs_g = std::abs(dual_residual(refined, x, set));
      ++local.polish_steps;
      lambda = refined;
      if (abs_g < best_abs_g) {
        best_abs_g = abs_g;
        best_lambda = refined;
      }
      if (abs_g == 0.0) break;
    }
    lambda = best_lambda;
  }

  local.lambda = lambda;
  z_of_lambda_into(lambda, x, set, out);
  if (info) *info = local;
}

std::vector<double> project(std::span<const double> x, const KnapsackSet& set,
                            ProjectionInfo* info) {
  std::vector<double> out(set.size());
  project_into(x, set, out, info);
  return out;
}

}  // namespace pcbb
