#include "pcbb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pcbb::kernels {

namespace {

constexpr std::size_t kGrain = 16384;

inline double clamp1(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

inline double harm(double a, double b) { return 2.0 * a * b / (a + b); }

int team_size(std::size_t n) {
#ifdef _OPENMP
  if (n < kGrain) return 1;
  int t = omp_get_max_threads();
  const std::size_t cap = n / (kGrain / 2);
  if (static_cast<std::size_t>(t) > cap) t = static_cast<int>(cap);
  return t > 1 ? t : 1;
#else
  (void)n;
  return 1;
#endif
}

// Compensated reduction over [0,n) split into contiguous chunks, one per
// thread, folded in thread order. Deterministic for a fixed team size.
template <class ChunkFn>
double chunked_sum(std::size_t n, ChunkFn&& fn) {
  const int nt = team_size(n);
  if (nt == 1) {
    CompensatedSum acc;
    fn(0, n, acc);
    return acc.result();
  }
  std::vector<CompensatedSum> part(static_cast<std::size_t>(nt));
  int team = 1;
#ifdef _OPENMP
#pragma omp parallel num_threads(nt)
  {
    const int nth = omp_get_num_threads();
    const int t = omp_get_thread_num();
    if (t == 0) team = nth;
    const std::size_t lo = n * static_cast<std::size_t>(t) / nth;
    const std::size_t hi = n * (static_cast<std::size_t>(t) + 1) / nth;
    CompensatedSum acc;
    fn(lo, hi, acc);
    part[static_cast<std::size_t>(t)] = acc;
  }
#else
  fn(0, n, part[0]);
#endif
  CompensatedSum total;
  for (int t = 0; t < team; ++t) total.add(part[static_cast<std::size_t>(t)].result());
  return total.result();
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands have mismatched lengths");
}

}  // namespace

namespace serial {

double dot(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < x.size(); ++i) acc.add(x[i] * y[i]);
  return acc.result();
}

double diff_dot_self(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc.add(d * d);
  }
  return acc.result();
}

double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double diff_inf_norm(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double min_element(std::span<const double> x) {
  double m = x.empty() ? 0.0 : x[0];
  for (double v : x) m = std::min(m, v);
  return m;
}

double max_element(std::span<const double> x) {
  double m = x.empty() ? 0.0 : x[0];
  for (double v : x) m = std::max(m, v);
  return m;
}

void combine_clamped(std::span<const double> x, double s, std::span<const double> d,
                     std::span<const double> lo, std::span<const double> hi,
                     std::span<double> out) {
  check_same_size(x.size(), d.size());
  check_same_size(x.size(), out.size());
  const bool boxed = !lo.empty();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i] + s * d[i];
    out[i] = boxed ? clamp1(v, lo[i], hi[i]) : v;
  }
}

double weighted_clamp_sum(double lambda, std::span<const double> x,
                          std::span<const double> a, std::span<const double> l,
                          std::span<const double> u) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc.add(a[i] * clamp1(x[i] - lambda * a[i], l[i], u[i]));
  }
  return acc.result();
}

void clamp_affine(double lambda, std::span<const double> x, std::span<const double> a,
                  std::span<const double> l, std::span<const double> u,
                  std::span<double> out) {
  check_same_size(x.size(), out.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = clamp1(x[i] - lambda * a[i], l[i], u[i]);
  }
}

PieceSums piece_sums(double lambda, std::span<const double> x, std::span<const double> a,
                     std::span<const double> l, std::span<const double> u) {
  PieceSums s;
  CompensatedSum fixed, ax, aa;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i] - lambda * a[i];
    if (v <= l[i]) {
      fixed.add(a[i] * l[i]);
    } else if (v >= u[i]) {
      fixed.add(a[i] * u[i]);
    } else {
      ax.add(a[i] * x[i]);
      aa.add(a[i] * a[i]);
    }
  }
  s.fixed = fixed.result();
  s.ax_free = ax.result();
  s.aa_free = aa.result();
  return s;
}

void breakpoint_hull(std::span<const double> x, std::span<const double> a,
                     std::span<const double> l, std::span<const double> u,
                     double& lambda_lo, double& lambda_hi) {
  double lo = (x[0] - u[0]) / a[0];
  double hi = (x[0] - l[0]) / a[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    lo = std::min(lo, (x[i] - u[i]) / a[i]);
    hi = std::max(hi, (x[i] - l[i]) / a[i]);
  }
  lambda_lo = lo;
  lambda_hi = hi;
}

bool any_truncated_component(std::span<const double> d, std::span<const double> g,
                             double alpha) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double ad = std::abs(d[i]);
    if (ad > 0.0 && ad < alpha * std::abs(g[i])) return true;
  }
  return false;
}

void stencil_apply(int dim, int n_axis, std::span<const double> k_cell,
                   std::span<const double> v, std::span<double> out) {
  const int N = n_axis;
  const double h = 1.0 / N;
  const double hf = (dim == 3) ? h : 1.0;  // h^(dim-2)
  if (dim == 2) {
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) {
        const std::size_t c = static_cast<std::size_t>(j) * N + i;
        const double kc = k_cell[c];
        const double vc = v[c];
        double acc = 0.0;
        acc += (i > 0) ? hf * harm(kc, k_cell[c - 1]) * (vc - v[c - 1]) : 2.0 * kc * hf * vc;
        acc += (i + 1 < N) ? hf * harm(kc, k_cell[c + 1]) * (vc - v[c + 1]) : 2.0 * kc * hf * vc;
        acc += (j > 0) ? hf * harm(kc, k_cell[c - N]) * (vc - v[c - N]) : 2.0 * kc * hf * vc;
        acc += (j + 1 < N) ? hf * harm(kc, k_cell[c + N]) * (vc - v[c + N]) : 2.0 * kc * hf * vc;
        out[c] = acc;
      }
    }
  } else {
    const std::size_t plane = static_cast<std::size_t>(N) * N;
    for (int kz = 0; kz < N; ++kz) {
      for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
          const std::size_t c = kz * plane + static_cast<std::size_t>(j) * N + i;
          const double kc = k_cell[c];
          const double vc = v[c];
          double acc = 0.0;
          acc += (i > 0) ? hf * harm(kc, k_cell[c - 1]) * (vc - v[c - 1]) : 2.0 * kc * hf * vc;
          acc += (i + 1 < N) ? hf * harm(kc, k_cell[c + 1]) * (vc - v[c + 1]) : 2.0 * kc * hf * vc;
          acc += (j > 0) ? hf * harm(kc, k_cell[c - N]) * (vc - v[c - N]) : 2.0 * kc * hf * vc;
          acc += (j + 1 < N) ? hf * harm(kc, k_cell[c + N]) * (vc - v[c + N]) : 2.0 * kc * hf * vc;
          acc += (kz > 0) ? hf * harm(kc, k_cell[c - plane]) * (vc - v[c - plane])
                          : 2.0 * kc * hf * vc;
          acc += (kz + 1 < N) ? hf * harm(kc, k_cell[c + plane]) * (vc - v[c + plane])
                              : 2.0 * kc * hf * vc;
          out[c] = acc;
        }
      }
    }
  }
}

void stencil_diagonal(int dim, int n_axis, std::span<const double> k_cell,
                      std::span<double> out) {
  const int N = n_axis;
  const double h = 1.0 / N;
  const double hf = (dim == 3) ? h : 1.0;
  const std::size_t plane = static_cast<std::size_t>(N) * N;
  const std::size_t n = k_cell.size();
  for (std::size_t c = 0; c < n; ++c) {
    const int i = static_cast<int>(c % N);
    const int j = static_cast<int>((c / N) % N);
    const int kz = static_cast<int>(dim == 3 ? c / plane : 0);
    const double kc = k_cell[c];
    double acc = 0.0;
    acc += (i > 0) ? hf * harm(kc, k_cell[c - 1]) : 2.0 * kc * hf;
    acc += (i + 1 < N) ? hf * harm(kc, k_cell[c + 1]) : 2.0 * kc * hf;
    acc += (j > 0) ? hf * harm(kc, k_cell[c - N]) : 2.0 * kc * hf;
    acc += (j + 1 < N) ? hf * harm(kc, k_cell[c + N]) : 2.0 * kc * hf;
    if (dim == 3) {
      acc += (kz > 0) ? hf * harm(kc, k_cell[c - plane]) : 2.0 * kc * hf;
      acc += (kz + 1 < N) ? hf * harm(kc, k_cell[c + plane]) : 2.0 * kc * hf;
    }
    out[c] = acc;
  }
}

}  // namespace serial

double dot(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  return chunked_sum(x.size(), [&](std::size_t lo, std::size_t hi, CompensatedSum& acc) {
    for (std::size_t i = lo; i < hi; ++i) acc.add(x[i] * y[i]);
  });
}

double diff_dot_self(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  return chunked_sum(x.size(), [&](std::size_t lo, std::size_t hi, CompensatedSum& acc) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = x[i] - y[i];
      acc.add(d * d);
    }
  });
}

double inf_norm(std::span<const double> x) {
  const std::size_t n = x.size();
  if (team_size(n) == 1) return serial::inf_norm(x);
  double m = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(max : m)
#endif
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

double diff_inf_norm(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  const std::size_t n = x.size();
  if (team_size(n) == 1) return serial::diff_inf_norm(x, y);
  double m = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(max : m)
#endif
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double min_element(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  if (team_size(n) == 1) return serial::min_element(x);
  double m = x[0];
#ifdef _OPENMP
#pragma omp parallel for reduction(min : m)
#endif
  for (std::size_t i = 0; i < n; ++i) m = std::min(m, x[i]);
  return m;
}

double max_element(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  if (team_size(n) == 1) return serial::max_element(x);
  double m = x[0];
#ifdef _OPENMP
#pragma omp parallel for reduction(max : m)
#endif
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

void combine_clamped(std::span<const double> x, double s, std::span<const double> d,
                     std::span<const double> lo, std::span<const double> hi,
                     std::span<double> out) {
  check_same_size(x.size(), d.size());
  check_same_size(x.size(), out.size());
  const std::size_t n = x.size();
  if (team_size(n) == 1) {
    serial::combine_clamped(x, s, d, lo, hi, out);
    return;
  }
  const bool boxed = !lo.empty();
#ifdef _OPENMP
#pragma omp parallel for
#endif
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i] + s * d[i];
    out[i] = boxed ? clamp1(v, lo[i], hi[i]) : v;
  }
}

double weighted_clamp_sum(double lambda, std::span<const double> x,
                          std::span<const double> a, std::span<const double> l,
                          std::span<const double> u) {
  return chunked_sum(x.size(), [&](std::size_t lo, std::size_t hi, CompensatedSum& acc) {
    for (std::size_t i = lo; i < hi; ++i) {
      acc.add(a[i] * clamp1(x[i] - lambda * a[i], l[i], u[i]));
    }
  });
}

void clamp_affine(double lambda, std::span<const double> x, std::span<const double> a,
                  std::span<const double> l, std::span<const double> u,
                  std::span<double> out) {
  check_same_size(x.size(), out.size());
  const std::size_t n = x.size();
  if (team_size(n) == 1) {
    serial::clamp_affine(lambda, x, a, l, u, out);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for
#endif
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = clamp1(x[i] - lambda * a[i], l[i], u[i]);
  }
}

PieceSums piece_sums(double lambda, std::span<const double> x, std::span<const double> a,
                     std::span<const double> l, std::span<const double> u) {
  const std::size_t n = x.size();
  const int nt = team_size(n);
  if (nt == 1) return serial::piece_sums(lambda, x, a, l, u);
  std::vector<PieceSums> part(static_cast<std::size_t>(nt));
  int team = 1;
#ifdef _OPENMP
#pragma omp parallel num_threads(nt)
  {
    const int nth = omp_get_num_threads();
    const int t = omp_get_thread_num();
    if (t == 0) team = nth;
    const std::size_t lo = n * static_cast<std::size_t>(t) / nth;
    const std::size_t hi = n * (static_cast<std::size_t>(t) + 1) / nth;
    CompensatedSum fixed, ax, aa;
    for (std::size_t i = lo; i < hi; ++i) {
      const double v = x[i] - lambda * a[i];
      if (v <= l[i]) {
        fixed.add(a[i] * l[i]);
      } else if (v >= u[i]) {
        fixed.add(a[i] * u[i]);
      } else {
        ax.add(a[i] * x[i]);
        aa.add(a[i] * a[i]);
      }
    }
    PieceSums ps;
    ps.fixed = fixed.result();
    ps.ax_free = ax.result();
    ps.aa_free = aa.result();
    part[static_cast<std::size_t>(t)] = ps;
  }
#else
  part[0] = serial::piece_sums(lambda, x, a, l, u);
#endif
  CompensatedSum fixed, ax, aa;
  for (int t = 0; t < team; ++t) {
    fixed.add(part[static_cast<std::size_t>(t)].fixed);
    ax.add(part[static_cast<std::size_t>(t)].ax_free);
    aa.add(part[static_cast<std::size_t>(t)].aa_free);
  }
  PieceSums total;
  total.fixed = fixed.result();
  total.ax_free = ax.result();
  total.aa_free = aa.result();
  return total;
}

void breakpoint_hull(std::span<const double> x, std::span<const double> a,
                     std::span<const double> l, std::span<const double> u,
                     double& lambda_lo, double& lambda_hi) {
  const std::size_t n = x.size();
  if (team_size(n) == 1) {
    serial::breakpoint_hull(x, a, l, u, lambda_lo, lambda_hi);
    return;
  }
  double lo = (x[0] - u[0]) / a[0];
  double hi = (x[0] - l[0]) / a[0];
#ifdef _OPENMP
#pragma omp parallel for reduction(min : lo) reduction(max : hi)
#endif
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, (x[i] - u[i]) / a[i]);
    hi = std::max(hi, (x[i] - l[i]) / a[i]);
  }
  lambda_lo = lo;
  lambda_hi = hi;
}

bool any_truncated_component(std::span<const double> d, std::span<const double> g,
                             double alpha) {
  const std::size_t n = d.size();
  if (team_size(n) == 1) return serial::any_truncated_component(d, g, alpha);
  bool found = false;
#ifdef _OPENMP
#pragma omp parallel for reduction(|| : found)
#endif
  for (std::size_t i = 0; i < n; ++i) {
    const double ad = std::abs(d[i]);
    found = found || (ad > 0.0 && ad < alpha * std::abs(g[i]));
  }
  return found;
}

void stencil_apply(int dim, int n_axis, std::span<const double> k_cell,
                   std::span<const double> v, std::span<double> out) {
  const int N = n_axis;
  const std::size_t n = k_cell.size();
  if (team_size(n) == 1) {
    serial::stencil_apply(dim, N, k_cell, v, out);
    return;
  }
  const double h = 1.0 / N;
  const double hf = (dim == 3) ? h : 1.0;
  if (dim == 2) {
#ifdef _OPENMP
#pragma omp parallel for
#endif
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) {
        const std::size_t c = static_cast<std::size_t>(j) * N + i;
        const double kc = k_cell[c];
        const double vc = v[c];
        double acc = 0.0;
        acc += (i > 0) ? hf * harm(kc, k_cell[c - 1]) * (vc - v[c - 1]) : 2.0 * kc * hf * vc;
        acc += (i + 1 < N) ? hf * harm(kc, k_cell[c + 1]) * (vc - v[c + 1]) : 2.0 * kc * hf * vc;
        acc += (j > 0) ? hf * harm(kc, k_cell[c - N]) * (vc - v[c - N]) : 2.0 * kc * hf * vc;
        acc += (j + 1 < N) ? hf * harm(kc, k_cell[c + N]) * (vc - v[c + N]) : 2.0 * kc * hf * vc;
        out[c] = acc;
      }
    }
  } else {
    const std::size_t plane = static_cast<std::size_t>(N) * N;
#ifdef _OPENMP
#pragma omp parallel for
#endif
    for (int kz = 0; kz < N; ++kz) {
      for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
          const std::size_t c = kz * plane + static_cast<std::size_t>(j) * N + i;
          const double kc = k_cell[c];
          const double vc = v[c];
          double acc = 0.0;
          acc += (i > 0) ? hf * harm(kc, k_cell[c - 1]) * (vc - v[c - 1]) : 2.0 * kc * hf * vc;
          acc += (i + 1 < N) ? hf * harm(kc, k_cell[c + 1]) * (vc - v[c + 1]) : 2.0 * kc * hf * vc;
          acc += (j > 0) ? hf * harm(kc, k_cell[c - N]) * (vc - v[c - N]) : 2.0 * kc * hf * vc;
          acc += (j + 1 < N) ? hf * harm(kc, k_cell[c + N]) * (vc - v[c + N]) : 2.0 * kc * hf * vc;
          acc += (kz > 0) ? hf * harm(kc, k_cell[c - plane]) * (vc - v[c - plane])
                          : 2.0 * kc * hf * vc;
          acc += (kz + 1 < N) ? hf * harm(kc, k_cell[c + plane]) * (vc - v[c + plane])
                              : 2.0 * kc * hf * vc;
          out[c] = acc;
        }
      }
    }
  }
}

void stencil_diagonal(int dim, int n_axis, std::span<const double> k_cell,
                      std::span<double> out) {
  serial::stencil_diagonal(dim, n_axis, k_cell, out);
}

}  // namespace pcbb::kernels
