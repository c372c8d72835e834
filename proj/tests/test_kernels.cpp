#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcbb/kernels.hpp"
#include "pcbb/rng.hpp"

namespace k = pcbb::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, pcbb::Rng& rng, double lo = -2.0,
                               double hi = 2.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("compensated sum recovers cancellation-heavy totals") {
  k::CompensatedSum acc;
  acc.add(1e16);
  acc.add(1.0);
  acc.add(-1e16);
  CHECK(acc.result() == 1.0);

  // alternating large/small terms against long double reference
  pcbb::Rng rng(3);
  k::CompensatedSum sum;
  long double ref = 0.0L;
  for (int i = 0; i < 20000; ++i) {
    const double v = rng.uniform(-1.0, 1.0) * ((i % 7 == 0) ? 1e12 : 1e-3);
    sum.add(v);
    ref += v;
  }
  CHECK(std::abs(sum.result() - static_cast<double>(ref)) <=
        1e-12 * std::abs(static_cast<double>(ref)) + 1e-12);
}

TEST_CASE("parallel reductions match the serial reference") {
  pcbb::Rng rng(17);
  // spans the serial cutoff and well past it
  for (std::size_t n : {1000u, 100000u, 300001u}) {
    const auto x = random_vec(n, rng);
    const auto y = random_vec(n, rng);
    const double ds = k::serial::dot(x, y);
    const double dp = k::dot(x, y);
    CHECK(std::abs(ds - dp) <= 1e-12 * (1.0 + std::abs(ds)));
    CHECK(k::inf_norm(x) == k::serial::inf_norm(x));
    CHECK(k::diff_inf_norm(x, y) == k::serial::diff_inf_norm(x, y));
    CHECK(std::abs(k::diff_dot_self(x, y) - k::serial::diff_dot_self(x, y)) <=
          1e-12 * (1.0 + k::serial::diff_dot_self(x, y)));
  }
}

TEST_CASE("parallel reductions are reproducible run to run") {
  pcbb::Rng rng(9);
  const auto x = random_vec(250000, rng);
  const auto y = random_vec(250000, rng);
  const double first = k::dot(x, y);
  for (int rep = 0; rep < 5; ++rep) CHECK(k::dot(x, y) == first);
}

TEST_CASE("map kernels agree bitwise between serial and parallel paths") {
  pcbb::Rng rng(23);
  const std::size_t n = 200000;
  const auto x = random_vec(n, rng);
  const auto a = random_vec(n, rng, 0.5, 2.0);
  std::vector<double> l(n), u(n);
  for (std::size_t i = 0; i < n; ++i) {
    l[i] = rng.uniform(-1.0, 0.0);
    u[i] = l[i] + rng.uniform(0.1, 2.0);
  }
  std::vector<double> out_s(n), out_p(n);
  k::serial::clamp_affine(0.37, x, a, l, u, out_s);
  k::clamp_affine(0.37, x, a, l, u, out_p);
  CHECK(out_s == out_p);

  const auto d = random_vec(n, rng);
  k::serial::combine_clamped(x, 0.5, d, l, u, out_s);
  k::combine_clamped(x, 0.5, d, l, u, out_p);
  CHECK(out_s == out_p);

  const double ws = k::serial::weighted_clamp_sum(0.37, x, a, l, u);
  const double wp = k::weighted_clamp_sum(0.37, x, a, l, u);
  CHECK(std::abs(ws - wp) <= 1e-12 * (1.0 + std::abs(ws)));

  const auto ps_s = k::serial::piece_sums(0.37, x, a, l, u);
  const auto ps_p = k::piece_sums(0.37, x, a, l, u);
  CHECK(std::abs(ps_s.fixed - ps_p.fixed) <= 1e-10);
  CHECK(std::abs(ps_s.ax_free - ps_p.ax_free) <= 1e-10);
  CHECK(std::abs(ps_s.aa_free - ps_p.aa_free) <= 1e-10);

  double lo_s, hi_s, lo_p, hi_p;
  k::serial::breakpoint_hull(x, a, l, u, lo_s, hi_s);
  k::breakpoint_hull(x, a, l, u, lo_p, hi_p);
  CHECK(lo_s == lo_p);
  CHECK(hi_s == hi_p);
}

TEST_CASE("stencil operator is symmetric and positive on random conductivities") {
  pcbb::Rng rng(31);
  for (int dim : {2, 3}) {
    const int N = dim == 2 ? 13 : 5;
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(N);
    std::vector<double> kc(n);
    for (auto& v : kc) v = rng.uniform(0.5, 100.0);
    const auto v = random_vec(n, rng);
    const auto w = random_vec(n, rng);
    std::vector<double> av(n), aw(n);
    k::stencil_apply(dim, N, kc, v, av);
    k::stencil_apply(dim, N, kc, w, aw);
    const double vaw = k::dot(v, aw);
    const double wav = k::dot(w, av);
    CHECK(std::abs(vaw - wav) <= 1e-10 * (1.0 + std::abs(vaw)));
    const double vav = k::dot(v, av);
    CHECK(vav > 0.0);  // Dirichlet terms make A strictly positive definite

    std::vector<double> diag(n);
    k::stencil_diagonal(dim, N, kc, diag);
    for (double dval : diag) CHECK(dval > 0.0);
    // diagonal matches e_c' A e_c on a few probes
    std::vector<double> e(n, 0.0), ae(n);
    for (std::size_t probe : {std::size_t{0}, n / 2, n - 1}) {
      std::fill(e.begin(), e.end(), 0.0);
      e[probe] = 1.0;
      k::stencil_apply(dim, N, kc, e, ae);
      CHECK(ae[probe] == doctest::Approx(diag[probe]).epsilon(1e-14));
    }

    std::vector<double> av_serial(n);
    k::serial::stencil_apply(dim, N, kc, v, av_serial);
    CHECK(av == av_serial);
  }
}
