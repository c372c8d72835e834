#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "pcbb/brent.hpp"

using pcbb::BrentResult;
using pcbb::DualBracket;
using pcbb::brent_root;

TEST_CASE("linear function is solved essentially immediately") {
  const auto res = brent_root([](double x) { return x - 1.0; }, {0.0, 2.0}, 1e-14);
  CHECK(res.root == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(res.iterations <= 3);
}

TEST_CASE("cubic root matches a bisection oracle") {
  auto f = [](double x) { return x * x * x - 2.0; };
  const auto res = brent_root(f, {0.0, 2.0}, 1e-14);
  int bisect_iters = 0;
  const double ref = pcbb::oracle::bisect_root(f, 0.0, 2.0, 1e-12, &bisect_iters);
  CHECK(res.root == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(res.root - ref) <= 1e-11);
  CHECK(res.iterations <= bisect_iters);  // far fewer in practice
}

TEST_CASE("iteration count stays within the bisection bound plus a constant") {
  // a nasty flat-then-steep function that defeats plain secant methods
  auto f = [](double x) { return std::copysign(std::pow(std::abs(x - 0.7), 9.0), x - 0.7); };
  const double tol = 1e-13;
  const auto res = brent_root(f, {-10.0, 10.0}, tol);
  const double width0 = 20.0;
  const int bisection_bound =
      static_cast<int>(std::ceil(std::log2(width0 / (0.5 * tol)))) + 1;
  CHECK(res.iterations <= bisection_bound + 4);
  CHECK(std::abs(res.root - 0.7) <= 1e-9);
}

TEST_CASE("degenerate bracket returns immediately") {
  const auto res = brent_root([](double x) { return x; }, {1.5, 1.5}, 1e-14);
  CHECK(res.root == 1.5);
  CHECK(res.iterations == 0);
}

TEST_CASE("error paths: no sign change and non-finite values") {
  CHECK_THROWS_AS(brent_root([](double x) { return x * x + 1.0; }, {-1.0, 1.0}, 1e-12),
                  std::invalid_argument);
  CHECK_THROWS_AS(brent_root([](double) { return std::nan(""); }, {-1.0, 1.0}, 1e-12),
                  std::runtime_error);
  CHECK_THROWS_AS(brent_root([](double x) { return x < 0.05 ? -1.0 : std::nan(""); },
                             {-1.0, 1.0}, 1e-12),
                  std::runtime_error);
}

TEST_CASE("exact zero at an endpoint is found without iterating") {
  const auto res = brent_root([](double x) { return x; }, {0.0, 3.0}, 1e-14);
  CHECK(res.root == 0.0);
  CHECK(res.iterations == 0);
}
