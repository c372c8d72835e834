// Benchmark comparing the OpenMP kernels against their serial reference
// implementations. Prints per-kernel timings, speedup and the largest
// discrepancy between the two paths.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pcbb/kernels.hpp"
#include "pcbb/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;
namespace k = pcbb::kernels;

double time_ms(int repeats, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < repeats; ++r) fn();
  return std::chrono::duration<double>(Clock::now() - t0).count() * 1e3 / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms, double max_diff) {
  std::printf("%-22s %10.3f %10.3f %9.2fx %12.3e\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, max_diff);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 4'000'000;
  int repeats = 20;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--n") == 0 && i + 1 < argc) {
      n = static_cast<std::size_t>(std::stoll(argv[++i]));
    } else if (std::strcmp(argv[i], "--repeat") == 0 && i + 1 < argc) {
      repeats = std::stoi(argv[++i]);
    } else {
      std::printf("usage: %s [--n SIZE] [--repeat COUNT]\n", argv[0]);
      return 64;
    }
  }

#ifdef _OPENMP
  std::printf("threads: %d, n = %zu, repeats = %d\n", omp_get_max_threads(), n, repeats);
#else
  std::printf("threads: 1 (OpenMP disabled), n = %zu, repeats = %d\n", n, repeats);
#endif
  std::printf("%-22s %10s %10s %10s %12s\n", "kernel", "serial_ms", "omp_ms", "speedup",
              "max_diff");

  pcbb::Rng rng(7);
  std::vector<double> x(n), y(n), a(n), l(n), u(n), out1(n), out2(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform(0.5, 2.0);
    l[i] = rng.uniform(-1.0, 0.0);
    u[i] = l[i] + rng.uniform(0.1, 2.0);
    x[i] = rng.uniform(-2.0, 2.0);
    y[i] = rng.uniform(-2.0, 2.0);
  }

  {
    double rs = 0.0, rp = 0.0;
    const double ts = time_ms(repeats, [&] { rs = k::serial::dot(x, y); });
    const double tp = time_ms(repeats, [&] { rp = k::dot(x, y); });
    report("dot", ts, tp, std::abs(rs - rp));
  }
  {
    double rs = 0.0, rp = 0.0;
    const double ts = time_ms(repeats, [&] { rs = k::serial::inf_norm(x); });
    const double tp = time_ms(repeats, [&] { rp = k::inf_norm(x); });
    report("inf_norm", ts, tp, std::abs(rs - rp));
  }
  {
    double rs = 0.0, rp = 0.0;
    const double ts =
        time_ms(repeats, [&] { rs = k::serial::weighted_clamp_sum(0.3, x, a, l, u); });
    const double tp = time_ms(repeats, [&] { rp = k::weighted_clamp_sum(0.3, x, a, l, u); });
    report("weighted_clamp_sum", ts, tp, std::abs(rs - rp));
  }
  {
    const double ts =
        time_ms(repeats, [&] { k::serial::clamp_affine(0.3, x, a, l, u, out1); });
    const double tp = time_ms(repeats, [&] { k::clamp_affine(0.3, x, a, l, u, out2); });
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(out1[i] - out2[i]));
    report("clamp_affine", ts, tp, diff);
  }
  {
    k::PieceSums rs, rp;
    const double ts = time_ms(repeats, [&] { rs = k::serial::piece_sums(0.3, x, a, l, u); });
    const double tp = time_ms(repeats, [&] { rp = k::piece_sums(0.3, x, a, l, u); });
    const double diff = std::abs(rs.fixed - rp.fixed) + std::abs(rs.ax_free - rp.ax_free) +
                        std::abs(rs.aa_free - rp.aa_free);
    report("piece_sums", ts, tp, diff);
  }
  {
    // largest square grid that fits n cells
    int N = static_cast<int>(std::sqrt(static_cast<double>(n)));
    if (N < 2) N = 2;
    const std::size_t cells = static_cast<std::size_t>(N) * N;
    std::vector<double> kc(cells), v(cells), o1(cells), o2(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      kc[i] = rng.uniform(1.0, 100.0);
      v[i] = rng.uniform(-1.0, 1.0);
    }
    const double ts = time_ms(repeats, [&] { k::serial::stencil_apply(2, N, kc, v, o1); });
    const double tp = time_ms(repeats, [&] { k::stencil_apply(2, N, kc, v, o2); });
    double diff = 0.0;
    for (std::size_t i = 0; i < cells; ++i) diff = std::max(diff, std::abs(o1[i] - o2[i]));
    report(("stencil_apply_2d " + std::to_string(N) + "^2").c_str(), ts, tp, diff);
  }
  return 0;
}
