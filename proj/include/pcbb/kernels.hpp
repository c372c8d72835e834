#pragma once

// Data-parallel primitives shared by the projection, solver and FVM code.
//
// Every kernel has two entry points: the default one, which parallelizes
// with OpenMP above a grain size, and a plain serial reference under
// pcbb::kernels::serial that the tests and the kernel benchmark compare
// against. Reductions accumulate Neumaier-compensated partials over
// contiguous per-thread chunks and fold them in thread order, so results
// are reproducible run-to-run for a fixed thread count.

#include <cstddef>
#include <span>

namespace pcbb::kernels {

// Neumaier variant of Kahan summation; absorbs terms of any magnitude order.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if ((sum >= 0 ? sum : -sum) >= (v >= 0 ? v : -v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }

  double result() const { return sum + comp; }
};

// Sums of the free/clamped pieces of z(lambda) = clamp(x - lambda*a, l, u),
// split by which side of the clamp each component lands on.
struct PieceSums {
  double fixed = 0.0;    // sum of a_i * bound_i over clamped components
  double ax_free = 0.0;  // sum of a_i * x_i over free components
  double aa_free = 0.0;  // sum of a_i^2 over free components
};

double dot(std::span<const double> x, std::span<const double> y);
double diff_dot_self(std::span<const double> x, std::span<const double> y);  // ||x-y||^2
double inf_norm(std::span<const double> x);
double diff_inf_norm(std::span<const double> x, std::span<const double> y);  // ||x-y||_inf
double min_element(std::span<const double> x);
double max_element(std::span<const double> x);

// out_i = clamp(x_i + s*d_i, lo_i, hi_i); lo/hi may be empty (no clamp).
void combine_clamped(std::span<const double> x, double s, std::span<const double> d,
                     std::span<const double> lo, std::span<const double> hi,
                     std::span<double> out);

// sum_i a_i * clamp(x_i - lambda*a_i, l_i, u_i) -- the knapsack dual kernel.
double weighted_clamp_sum(double lambda, std::span<const double> x,
                          std::span<const double> a, std::span<const double> l,
                          std::span<const double> u);

// out_i = clamp(x_i - lambda*a_i, l_i, u_i)
void clamp_affine(double lambda, std::span<const double> x, std::span<const double> a,
                  std::span<const double> l, std::span<const double> u,
                  std::span<double> out);

PieceSums piece_sums(double lambda, std::span<const double> x, std::span<const double> a,
                     std::span<const double> l, std::span<const double> u);

// min_i (x_i-u_i)/a_i and max_i (x_i-l_i)/a_i -- the dual breakpoint hull.
void breakpoint_hull(std::span<const double> x, std::span<const double> a,
                     std::span<const double> l, std::span<const double> u,
                     double& lambda_lo, double& lambda_hi);

// true iff some component satisfies 0 < |d_i| < alpha*|g_i| (g_i != 0).
bool any_truncated_component(std::span<const double> d, std::span<const double> g,
                             double alpha);

// Cell-centered FVM operator for -div(k grad .) on [0,1]^dim with N cells per
// axis, harmonic-mean face conductivities and homogeneous Dirichlet boundary
// handling folded into the diagonal. out = A(k) v.
void stencil_apply(int dim, int n_axis, std::span<const double> k_cell,
                   std::span<const double> v, std::span<double> out);
void stencil_diagonal(int dim, int n_axis, std::span<const double> k_cell,
                      std::span<double> out);

namespace serial {

double dot(std::span<const double> x, std::span<const double> y);
double diff_dot_self(std::span<const double> x, std::span<const double> y);
double inf_norm(std::span<const double> x);
double diff_inf_norm(std::span<const double> x, std::span<const double> y);
double min_element(std::span<const double> x);
double max_element(std::span<const double> x);
void combine_clamped(std::span<const double> x, double s, std::span<const double> d,
                     std::span<const double> lo, std::span<const double> hi,
                     std::span<double> out);
double weighted_clamp_sum(double lambda, std::span<const double> x,
                          std::span<const double> a, std::span<const double> l,
                          std::span<const double> u);
void clamp_affine(double lambda, std::span<const double> x, std::span<const double> a,
                  std::span<const double> l, std::span<const double> u,
                  std::span<double> out);
PieceSums piece_sums(double lambda, std::span<const double> x, std::span<const double> a,
                     std::span<const double> l, std::span<const double> u);
void breakpoint_hull(std::span<const double> x, std::span<const double> a,
                     std::span<const double> l, std::span<const double> u,
                     double& lambda_lo, double& lambda_hi);
bool any_truncated_component(std::span<const double> d, std::span<const double> g,
                             double alpha);
void stencil_apply(int dim, int n_axis, std::span<const double> k_cell,
                   std::span<const double> v, std::span<double> out);
void stencil_diagonal(int dim, int n_axis, std::span<const double> k_cell,
                      std::span<double> out);

}  // namespace serial

}  // namespace pcbb::kernels
