#include "pcbb/synthetic.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "pcbb/kernels.hpp"

namespace pcbb {

KnapsackInstance random_knapsack_instance(std::size_t n, Rng& rng) {
  std::vector<double> a(n), l(n), u(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform(0.5, 2.0);
    l[i] = rng.uniform(-1.0, 1.0);
    u[i] = l[i] + rng.uniform(0.05, 2.0);
  }
  kernels::CompensatedSum al, au;
  for (std::size_t i = 0; i < n; ++i) {
    al.add(a[i] * l[i]);
    au.add(a[i] * u[i]);
  }
  const double t = rng.uniform(0.05, 0.95);
  const double b = al.result() + t * (au.result() - al.result());
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(l[i] - 1.5, u[i] + 1.5);
  }
  return {KnapsackSet(std::move(a), b, std::move(l), std::move(u)), std::move(x)};
}

QuadraticObjective::QuadraticObjective(std::vector<double> a_matrix, std::vector<double> q)
    : a_(std::move(a_matrix)), q_(std::move(q)), scratch_(q_.size()) {
  if (a_.size() != q_.size() * q_.size()) {
    throw std::invalid_argument("QuadraticObjective: matrix/vector size mismatch");
  }
}

double QuadraticObjective::value(std::span<const double> x) {
  const std::size_t n = q_.size();
  double f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += a_[i * n + j] * x[j];
    f += x[i] * (0.5 * ax - q_[i]);
  }
  return f;
}

double QuadraticObjective::value_and_gradient(std::span<const double> x,
                                              std::span<double> grad) {
  const std::size_t n = q_.size();
  double f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += a_[i * n + j] * x[j];
    grad[i] = ax - q_[i];
    f += x[i] * (0.5 * ax - q_[i]);
  }
  return f;
}

namespace {

// Random orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
std::vector<double> random_orthogonal(std::size_t n, Rng& rng) {
  std::vector<double> q(n * n);
  for (auto& v : q) v = rng.normal();
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t prev = 0; prev < col; ++prev) {
      double dot = 0.0;
      for (std::size_t r = 0; r < n; ++r) dot += q[r * n + col] * q[r * n + prev];
      for (std::size_t r = 0; r < n; ++r) q[r * n + col] -= dot * q[r * n + prev];
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm += q[r * n + col] * q[r * n + col];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {  // retry direction deterministically
      for (std::size_t r = 0; r < n; ++r) q[r * n + col] = (r == col) ? 1.0 : 0.0;
      norm = 1.0;
    }
    for (std::size_t r = 0; r < n; ++r) q[r * n + col] /= norm;
  }
  return q;
}

}  // namespace

QuadraticInstance random_quadratic_instance(std::size_t n, Rng& rng, double condition) {
  const std::vector<double> q_mat = random_orthogonal(n, rng);
  std::vector<double> eig(n);
  const double lo = 1.0 / std::sqrt(condition);
  const double hi = std::sqrt(condition);
  for (std::size_t i = 0; i < n; ++i) {
    eig[i] = lo * std::exp(rng.uniform() * std::log(hi / lo));
  }
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q_mat[i * n + k] * eig[k] * q_mat[j * n + k];
      a[i * n + j] = s;
    }
  }
  std::vector<double> lin(n);
  for (auto& v : lin) v = rng.uniform(-2.0, 2.0);

  auto inst = random_knapsack_instance(n, rng);
  std::vector<double> x0 = inst.x;
  return {QuadraticObjective(std::move(a), std::move(lin)), std::move(inst.set),
          std::move(x0)};
}

}  // namespace pcbb
