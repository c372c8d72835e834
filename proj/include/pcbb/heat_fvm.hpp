#pragma once

// Two-material heat-conduction topology optimization on [0,1]^dim:
//
//   min J(w) = 1/2 int |grad theta|^2
//   s.t. -div(k(w) grad theta) = f,  theta = theta0 on the boundary,
//        k(w) = w^p k_beta + (1-w^p) k_alpha,  sum_i w_i = R n,  0 <= w <= 1.
//
// Discretization is a cell-centered finite volume scheme with harmonic-mean
// face conductivities, solved by Jacobi-preconditioned conjugate gradients.
// The design gradient is the discrete adjoint of the discretized system, so
// it differentiates the implemented objective exactly (up to solver
// tolerances), not a re-discretized continuum formula.

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pcbb/knapsack.hpp"
#include "pcbb/solver.hpp"

namespace pcbb {

struct Grid {
  int dim = 2;            // 2 or 3
  int cells_per_axis = 0; // N; domain [0,1]^dim, uniform cells

  double spacing() const { return 1.0 / cells_per_axis; }
  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(cells_per_axis);
    return n;
  }
  // center coordinate of cell (i,j[,k]); unused axes are 0
  std::array<double, 3> center(int i, int j, int k = 0) const {
    const double h = spacing();
    return {(i + 0.5) * h, (j + 0.5) * h, dim == 3 ? (k + 0.5) * h : 0.0};
  }
};

struct HeatProblem {
  Grid grid;
  double k_alpha = 1.0;
  double k_beta = 2.0;
  double penalization = 1.0;  // p >= 1
  std::vector<double> load;   // f per cell
  double volume_fraction = 0.4;  // R
  double theta0 = 0.0;           // Dirichlet boundary value

  // Uniform-load construction; validates parameter ranges.
  static HeatProblem uniform(int dim, int n_axis, double k_alpha, double k_beta,
                             double penalization, double volume_fraction,
                             double load_value = 1.0, double theta0 = 0.0);
  void validate() const;
};

// k_i = w_i^p k_beta + (1 - w_i^p) k_alpha. Throws std::domain_error when a
// component of w leaves [0,1] beyond rounding dust.
std::vector<double> interpolate_conductivity(std::span<const double> w,
                                             const HeatProblem& prob);
void interpolate_conductivity_into(std::span<const double> w, const HeatProblem& prob,
                                   std::span<double> k_out);

struct PcgResult {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Solves A(k) theta = b(k) by Jacobi-PCG from a zero start to a relative
// residual of tol (floored at 1e-15; tighter requests are clamped). Throws
// std::runtime_error if the residual cannot be pushed below 1e-8.
std::vector<double> assemble_and_solve_state(std::span<const double> k_cell,
                                             const HeatProblem& prob, double tol,
                                             PcgResult* pcg = nullptr);

// Discrete 1/2 int |grad theta|^2: squared face-normal difference quotients,
// full cell volume per interior face, half per boundary face.
double objective_value(std::span<const double> theta, const HeatProblem& prob);

// Variant with an explicit Dirichlet trace (face-center -> value); the
// default uses the constant prob.theta0.
using BoundaryValue = std::function<double(const std::array<double, 3>&)>;
double objective_value(std::span<const double> theta, const HeatProblem& prob,
                       const BoundaryValue& boundary);

// Exact derivative of the discrete objective with respect to theta.
void objective_gradient_theta(std::span<const double> theta, const HeatProblem& prob,
                              std::span<double> out);

// Adjoint solve A(k) eta = dJ/dtheta (the operator is symmetric).
std::vector<double> solve_adjoint(std::span<const double> k_cell,
                                  std::span<const double> theta, const HeatProblem& prob,
                                  double tol, PcgResult* pcg = nullptr);

// dJ/dw per cell: differentiates the transmissibilities through the harmonic
// mean and chains through dk/dw = p w^(p-1) (k_beta - k_alpha).
std::vector<double> design_gradient(std::span<const double> w,
                                    std::span<const double> theta,
                                    std::span<const double> eta, const HeatProblem& prob);

// Knapsack design set for the problem: unit weights, budget R*n, box [0,1].
KnapsackSet design_set(const HeatProblem& prob);

// Objective evaluator chaining interpolation, state solve, objective and
// adjoint gradient. Owns its scratch; one instance per concurrent solve.
// value_and_gradient reuses the state of the immediately preceding value()
// call when invoked at the bitwise-identical design, so an accepted line
// search trial costs no second PDE solve.
class HeatObjective final : public Objective {
 public:
  HeatObjective(HeatProblem prob, double pcg_tol);

  std::size_t dimension() const override { return prob_.grid.cell_count(); }
  double value(std::span<const double> w) override;
  double value_and_gradient(std::span<const double> w, std::span<double> grad) override;

  const HeatProblem& problem() const { return prob_; }
  long state_solves() const { return state_solves_; }
  long adjoint_solves() const { return adjoint_solves_; }
  const std::vector<double>& last_state() const { return theta_; }
  const std::vector<double>& last_adjoint() const { return eta_; }

 private:
  void solve_state_for(std::span<const double> w);

  HeatProblem prob_;
  double pcg_tol_;
  std::vector<double> w_cache_;
  std::vector<double> k_cell_;
  std::vector<double> theta_;
  std::vector<double> eta_;
  double f_cache_ = 0.0;
  bool cache_valid_ = false;
  long state_solves_ = 0;
  long adjoint_solves_ = 0;
};

std::unique_ptr<HeatObjective> make_objective(HeatProblem prob, double pcg_tol);

}  // namespace pcbb
