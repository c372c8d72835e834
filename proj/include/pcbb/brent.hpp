#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace pcbb {

// Sign-changing interval for a scalar root-finding problem. For the knapsack
// dual this is [min_i (x_i-u_i)/a_i, max_i (x_i-l_i)/a_i].
struct DualBracket {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

struct BrentResult {
  double root = 0.0;
  double f_root = 0.0;
  int iterations = 0;
};

// Brent's method: inverse quadratic interpolation / secant with bisection
// fallbacks. On top of the classic safeguards the bracket is forced onto a
// bisection schedule (width <= width0 * 2^-(iter-2)), so the iteration count
// never exceeds the plain bisection bound for the same tolerance by more
// than a couple of steps. Converges when the bracket half-width drops below
// tol*max(1,|root|) plus the unavoidable 2*eps*|root| term.
//
// Throws std::invalid_argument when f has no sign change over the bracket
// and std::runtime_error on non-finite function values.
template <class F>
BrentResult brent_root(F&& f, DualBracket bracket, double tol, int max_iter = 200) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double a = bracket.lambda_min;
  double b = bracket.lambda_max;
  if (!(a <= b)) throw std::invalid_argument("brent_root: inverted bracket");

  BrentResult res;
  if (a == b) {
    res.root = a;
    res.f_root = f(a);
    return res;
  }

  double fa = f(a);
  double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    throw std::runtime_error("brent_root: non-finite function value at bracket endpoint");
  }
  if (fa == 0.0) return {a, 0.0, 0};
  if (fb == 0.0) return {b, 0.0, 0};
  if ((fa > 0.0) == (fb > 0.0)) {
    throw std::invalid_argument("brent_root: no sign change over bracket");
  }

  const double width0 = b - a;
  double c = a, fc = fa;
  double d = b - a, e = b - a;

  for (int iter = 1; iter <= max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol * std::max(1.0, std::abs(b));
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      res.root = b;
      res.f_root = fb;
      res.iterations = iter - 1;
      return res;
    }

    // schedule guard: stay at least on the bisection halving pace
    const bool behind_schedule =
        std::abs(c - b) > width0 * std::ldexp(1.0, -(iter - 2));

    if (!behind_schedule && std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < (min1 < min2 ? min1 : min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm >= 0.0 ? tol1 : -tol1);
    fb = f(b);
    if (!std::isfinite(fb)) {
      throw std::runtime_error("brent_root: non-finite function value");
    }
    res.iterations = iter;
  }
  res.root = b;
  res.f_root = fb;
  return res;
}

}  // namespace pcbb
