#include "pcbb/heat_fvm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pcbb/kernels.hpp"

namespace pcbb {

namespace {

constexpr double kPcgTolFloor = 1e-15;
constexpr double kPcgAcceptCeil = 1e-8;  // worst relative residual accepted silently
constexpr double kBoxDust = 1e-12;

double pow_p(double w, double p) {
  if (p == 1.0) return w;
  return std::pow(w, p);
}

// d(w^p)/dw with the p = 1 convention w^0 = 1 (no pow call).
double pow_p_derivative(double w, double p) {
  if (p == 1.0) return 1.0;
  if (p == 2.0) return 2.0 * w;
  return p * std::pow(w, p - 1.0);
}

// d harm(kc, kn) / d kc
double harm_derivative(double kc, double kn) {
  const double s = kc + kn;
  return 2.0 * kn * kn / (s * s);
}

struct FaceGeometry {
  double h;
  double hf;         // h^(dim-2): transmissibility scale
  double face_vol;   // h^dim: volume credited to an interior face
  std::size_t plane; // index stride along the third axis
};

FaceGeometry geometry(const HeatProblem& prob) {
  const int N = prob.grid.cells_per_axis;
  const double h = prob.grid.spacing();
  FaceGeometry g;
  g.h = h;
  g.hf = prob.grid.dim == 3 ? h : 1.0;
  g.face_vol = prob.grid.dim == 3 ? h * h * h : h * h;
  g.plane = static_cast<std::size_t>(N) * static_cast<std::size_t>(N);
  return g;
}

}  // namespace

HeatProblem HeatProblem::uniform(int dim, int n_axis, double k_alpha, double k_beta,
                                 double penalization, double volume_fraction,
                                 double load_value, double theta0) {
  HeatProblem prob;
  prob.grid.dim = dim;
  prob.grid.cells_per_axis = n_axis;
  prob.k_alpha = k_alpha;
  prob.k_beta = k_beta;
  prob.penalization = penalization;
  prob.volume_fraction = volume_fraction;
  prob.theta0 = theta0;
  prob.load.assign(prob.grid.cell_count(), load_value);
  prob.validate();
  return prob;
}

void HeatProblem::validate() const {
  if (grid.dim != 2 && grid.dim != 3) {
    throw std::invalid_argument("HeatProblem: dim must be 2 or 3");
  }
  if (grid.cells_per_axis < 2) {
    throw std::invalid_argument("HeatProblem: need at least 2 cells per axis");
  }
  if (!(0.0 < k_alpha && k_alpha < k_beta)) {
    throw std::invalid_argument("HeatProblem: need 0 < k_alpha < k_beta");
  }
  if (!(penalization >= 1.0)) {
    throw std::invalid_argument("HeatProblem: penalization must be >= 1");
  }
  if (!(volume_fraction > 0.0 && volume_fraction < 1.0)) {
    throw std::invalid_argument("HeatProblem: volume fraction must lie in (0,1)");
  }
  if (load.size() != grid.cell_count()) {
    throw std::invalid_argument("HeatProblem: load vector does not match the grid");
  }
}

void interpolate_conductivity_into(std::span<const double> w, const HeatProblem& prob,
                                   std::span<double> k_out) {
  const std::size_t n = prob.grid.cell_count();
  if (w.size() != n || k_out.size() != n) {
    throw std::invalid_argument("interpolate_conductivity: dimension mismatch");
  }
  const double p = prob.penalization;
  const double ka = prob.k_alpha;
  const double kb = prob.k_beta;
  bool out_of_box = false;
#ifdef _OPENMP
#pragma omp parallel for reduction(|| : out_of_box)
#endif
  for (std::size_t i = 0; i < n; ++i) {
    double wi = w[i];
    if (wi < 0.0 || wi > 1.0) {
      out_of_box = out_of_box || (wi < -kBoxDust || wi > 1.0 + kBoxDust);
      wi = wi < 0.0 ? 0.0 : 1.0;
    }
    const double wp = pow_p(wi, p);
    k_out[i] = wp * kb + (1.0 - wp) * ka;
  }
  if (out_of_box) {
    throw std::domain_error("interpolate_conductivity: design outside [0,1]");
  }
}

std::vector<double> interpolate_conductivity(std::span<const double> w,
                                             const HeatProblem& prob) {
  std::vector<double> k(prob.grid.cell_count());
  interpolate_conductivity_into(w, prob, k);
  return k;
}

namespace {

// b_c = f_c h^dim + sum over boundary faces of 2 k_c h^(dim-2) theta0
void build_rhs(std::span<const double> k_cell, const HeatProblem& prob,
               std::span<double> b) {
  const int N = prob.grid.cells_per_axis;
  const FaceGeometry geo = geometry(prob);
  const double cell_vol = geo.face_vol;  // h^dim
  const std::size_t n = prob.grid.cell_count();
  for (std::size_t c = 0; c < n; ++c) {
    const int i = static_cast<int>(c % static_cast<std::size_t>(N));
    const int j = static_cast<int>((c / static_cast<std::size_t>(N)) % N);
    const int kz = static_cast<int>(prob.grid.dim == 3 ? c / geo.plane : 0);
    int boundary_faces = (i == 0) + (i == N - 1) + (j == 0) + (j == N - 1);
    if (prob.grid.dim == 3) boundary_faces += (kz == 0) + (kz == N - 1);
    b[c] = prob.load[c] * cell_vol +
           2.0 * k_cell[c] * geo.hf * prob.theta0 * boundary_faces;
  }
}

// Jacobi-preconditioned CG on A(k) x = b from a zero start. Deterministic:
// fixed iteration order and reductions with a stable combination order.
PcgResult pcg_solve(std::span<const double> k_cell, const HeatProblem& prob,
                    std::span<const double> b, double tol, std::span<double> x) {
  const std::size_t n = b.size();
  const int N = prob.grid.cells_per_axis;
  const int dim = prob.grid.dim;
  tol = std::max(tol, kPcgTolFloor);

  std::fill(x.begin(), x.end(), 0.0);
  const double b_norm = std::sqrt(kernels::dot(b, b));
  PcgResult res;
  if (b_norm == 0.0) return res;

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> inv_diag(n), z(n), p(n), q(n);
  kernels::stencil_diagonal(dim, N, k_cell, inv_diag);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / inv_diag[i];

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = kernels::dot(r, z);
  double r_norm = b_norm;
  double best = r_norm;
  int stagnant = 0;
  const int max_iter = 200 * N * dim + 1000;

  for (int it = 1; it <= max_iter; ++it) {
    kernels::stencil_apply(dim, N, k_cell, p, q);
    const double pq = kernels::dot(p, q);
    if (!(pq > 0.0)) {
      throw std::runtime_error("pcg_solve: operator lost positive definiteness");
    }
    const double alpha = rz / pq;
#ifdef _OPENMP
#pragma omp parallel for
#endif
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    r_norm = std::sqrt(kernels::dot(r, r));
    res.iterations = it;
    res.rel_residual = r_norm / b_norm;
    if (res.rel_residual <= tol) return res;

    if (r_norm < 0.9 * best) {
      best = r_norm;
      stagnant = 0;
    } else if (++stagnant >= 100) {
      break;  // rounding floor reached
    }

#ifdef _OPENMP
#pragma omp parallel for
#endif
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = kernels::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
#ifdef _OPENMP
#pragma omp parallel for
#endif
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  if (res.rel_residual > kPcgAcceptCeil) {
    throw std::runtime_error("pcg_solve: no convergence, relative residual " +
                             std::to_string(res.rel_residual));
  }
  return res;
}

}  // namespace

std::vector<double> assemble_and_solve_state(std::span<const double> k_cell,
                                             const HeatProblem& prob, double tol,
                                             PcgResult* pcg) {
  const std::size_t n = prob.grid.cell_count();
  if (k_cell.size() != n) {
    throw std::invalid_argument("assemble_and_solve_state: dimension mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(k_cell[i] > 0.0)) {
      throw std::invalid_argument("assemble_and_solve_state: conductivities must be > 0");
    }
  }
  std::vector<double> b(n), theta(n);
  build_rhs(k_cell, prob, b);
  const PcgResult res = pcg_solve(k_cell, prob, b, tol, theta);
  if (pcg) *pcg = res;
  return theta;
}

double objective_value(std::span<const double> theta, const HeatProblem& prob,
                       const BoundaryValue& boundary) {
  const int N = prob.grid.cells_per_axis;
  const int dim = prob.grid.dim;
  const FaceGeometry geo = geometry(prob);
  const double h = geo.h;
  const std::size_t strides[3] = {1, static_cast<std::size_t>(N), geo.plane};
  const int nz = dim == 3 ? N : 1;

  kernels::CompensatedSum acc;
  for (int kz = 0; kz < nz; ++kz) {
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) {
        const std::size_t c = (dim == 3 ? kz * geo.plane : 0) +
                              static_cast<std::size_t>(j) * N + i;
        const int coords[3] = {i, j, kz};
        for (int axis = 0; axis < dim; ++axis) {
          // interior face towards +axis, counted once from the lower cell
          if (coords[axis] + 1 < N) {
            const double q = (theta[c + strides[axis]] - theta[c]) / h;
            acc.add(0.5 * q * q * geo.face_vol);
          }
          // boundary faces carry half a cell volume and a one-sided quotient
          if (coords[axis] == 0) {
            auto fc = prob.grid.center(i, j, kz);
            fc[axis] = 0.0;
            const double q = (theta[c] - boundary(fc)) / (0.5 * h);
            acc.add(0.25 * q * q * geo.face_vol);
          }
          if (coords[axis] == N - 1) {
            auto fc = prob.grid.center(i, j, kz);
            fc[axis] = 1.0;
            const double q = (theta[c] - boundary(fc)) / (0.5 * h);
            acc.add(0.25 * q * q * geo.face_vol);
          }
        }
      }
    }
  }
  return acc.result();
}

double objective_value(std::span<const double> theta, const HeatProblem& prob) {
  const double t0 = prob.theta0;
  return objective_value(theta, prob, [t0](const std::array<double, 3>&) { return t0; });
}

void objective_gradient_theta(std::span<const double> theta, const HeatProblem& prob,
                              std::span<double> out) {
  const int N = prob.grid.cells_per_axis;
  const int dim = prob.grid.dim;
  const FaceGeometry geo = geometry(prob);
  const std::size_t n = prob.grid.cell_count();
  const double hf = geo.hf;  // h^(dim-2); equals face_vol / h^2
  const double t0 = prob.theta0;
#ifdef _OPENMP
#pragma omp parallel for
#endif
  for (std::size_t c = 0; c < n; ++c) {
    const int i = static_cast<int>(c % static_cast<std::size_t>(N));
    const int j = static_cast<int>((c / static_cast<std::size_t>(N)) % N);
    const int kz = static_cast<int>(dim == 3 ? c / geo.plane : 0);
    const int coords[3] = {i, j, kz};
    const std::size_t strides[3] = {1, static_cast<std::size_t>(N), geo.plane};
    double acc = 0.0;
    for (int axis = 0; axis < dim; ++axis) {
      acc += (coords[axis] > 0) ? hf * (theta[c] - theta[c - strides[axis]])
                                : 2.0 * hf * (theta[c] - t0);
      acc += (coords[axis] + 1 < N) ? hf * (theta[c] - theta[c + strides[axis]])
                                    : 2.0 * hf * (theta[c] - t0);
    }
    out[c] = acc;
  }
}

std::vector<double> solve_adjoint(std::span<const double> k_cell,
                                  std::span<const double> theta, const HeatProblem& prob,
                                  double tol, PcgResult* pcg) {
  const std::size_t n = prob.grid.cell_count();
  if (k_cell.size() != n || theta.size() != n) {
    throw std::invalid_argument("solve_adjoint: dimension mismatch");
  }
  std::vector<double> rhs(n), eta(n);
  objective_gradient_theta(theta, prob, rhs);
  const PcgResult res = pcg_solve(k_cell, prob, rhs, tol, eta);
  if (pcg) *pcg = res;
  return eta;
}

std::vector<double> design_gradient(std::span<const double> w,
                                    std::span<const double> theta,
                                    std::span<const double> eta,
                                    const HeatProblem& prob) {
  const int N = prob.grid.cells_per_axis;
  const int dim = prob.grid.dim;
  const FaceGeometry geo = geometry(prob);
  const std::size_t n = prob.grid.cell_count();
  if (w.size() != n || theta.size() != n || eta.size() != n) {
    throw std::invalid_argument("design_gradient: dimension mismatch");
  }
  std::vector<double> k_cell(n);
  interpolate_conductivity_into(w, prob, k_cell);

  std::vector<double> grad(n);
  const double hf = geo.hf;
  const double dk_range = prob.k_beta - prob.k_alpha;
  const double p = prob.penalization;
  const double t0 = prob.theta0;
#ifdef _OPENMP
#pragma omp parallel for
#endif
  for (std::size_t c = 0; c < n; ++c) {
    const int i = static_cast<int>(c % static_cast<std::size_t>(N));
    const int j = static_cast<int>((c / static_cast<std::size_t>(N)) % N);
    const int kz = static_cast<int>(dim == 3 ? c / geo.plane : 0);
    const int coords[3] = {i, j, kz};
    const std::size_t strides[3] = {1, static_cast<std::size_t>(N), geo.plane};
    double dj_dk = 0.0;  // dJ/dk_c at fixed theta, eta
    for (int axis = 0; axis < dim; ++axis) {
      if (coords[axis] > 0) {
        const std::size_t nb = c - strides[axis];
        dj_dk -= hf * harm_derivative(k_cell[c], k_cell[nb]) * (theta[c] - theta[nb]) *
                 (eta[c] - eta[nb]);
      } else {
        dj_dk -= 2.0 * hf * (theta[c] - t0) * eta[c];
      }
      if (coords[axis] + 1 < N) {
        const std::size_t nb = c + strides[axis];
        dj_dk -= hf * harm_derivative(k_cell[c], k_cell[nb]) * (theta[c] - theta[nb]) *
                 (eta[c] - eta[nb]);
      } else {
        dj_dk -= 2.0 * hf * (theta[c] - t0) * eta[c];
      }
    }
    grad[c] = dj_dk * pow_p_derivative(w[c], p) * dk_range;
  }
  return grad;
}

KnapsackSet design_set(const HeatProblem& prob) {
  const std::size_t n = prob.grid.cell_count();
  std::vector<double> a(n, 1.0), l(n, 0.0), u(n, 1.0);
  const double b = prob.volume_fraction * static_cast<double>(n);
  return KnapsackSet(std::move(a), b, std::move(l), std::move(u));
}

HeatObjective::HeatObjective(HeatProblem prob, double pcg_tol)
    : prob_(std::move(prob)), pcg_tol_(pcg_tol) {
  prob_.validate();
  const std::size_t n = prob_.grid.cell_count();
  w_cache_.resize(n);
  k_cell_.resize(n);
  theta_.resize(n);
  eta_.resize(n);
}

void HeatObjective::solve_state_for(std::span<const double> w) {
  interpolate_conductivity_into(w, prob_, k_cell_);
  std::vector<double> b(w.size());
  build_rhs(k_cell_, prob_, b);
  pcg_solve(k_cell_, prob_, b, pcg_tol_, theta_);
  ++state_solves_;
  f_cache_ = objective_value(theta_, prob_);
  std::copy(w.begin(), w.end(), w_cache_.begin());
  cache_valid_ = true;
}

double HeatObjective::value(std::span<const double> w) {
  if (w.size() != dimension()) throw std::invalid_argument("HeatObjective: bad dimension");
  const bool hit = cache_valid_ && std::memcmp(w_cache_.data(), w.data(),
                                               w.size() * sizeof(double)) == 0;
  if (!hit) solve_state_for(w);
  return f_cache_;
}

double HeatObjective::value_and_gradient(std::span<const double> w,
                                         std::span<double> grad) {
  if (w.size() != dimension() || grad.size() != dimension()) {
    throw std::invalid_argument("HeatObjective: bad dimension");
  }
  const bool hit = cache_valid_ && std::memcmp(w_cache_.data(), w.data(),
                                               w.size() * sizeof(double)) == 0;
  if (!hit) solve_state_for(w);
  std::vector<double> rhs(w.size());
  objective_gradient_theta(theta_, prob_, rhs);
  pcg_solve(k_cell_, prob_, rhs, pcg_tol_, eta_);
  ++adjoint_solves_;
  const std::vector<double> g = design_gradient(w, theta_, eta_, prob_);
  std::copy(g.begin(), g.end(), grad.begin());
  return f_cache_;
}

std::unique_ptr<HeatObjective> make_objective(HeatProblem prob, double pcg_tol) {
  return std::make_unique<HeatObjective>(std::move(prob), pcg_tol);
}

}  // namespace pcbb
