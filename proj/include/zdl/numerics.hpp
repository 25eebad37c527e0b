#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "zdl/error.hpp"

namespace zdl {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

namespace numerics {

/// Bisection for a sign change of `f` on [lo, hi]; stops when the bracket is
/// narrower than `xtol`. Throws BracketFailure when there is no sign change.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol, int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw Error(ErrorKind::BracketFailure, "no sign change on bracket");
  }
  for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct QuadResult {
  cplx value;
  double error;
};

/// tanh-sinh quadrature of a complex integrand, done as two real passes.
/// Suited to endpoint singularities of square-root type.
template <class F>
QuadResult tanh_sinh_complex(F&& f, double a, double b, double tol = 1e-13) {
  boost::math::quadrature::tanh_sinh<double> ts(15);
  double err_re = 0, err_im = 0, l1 = 0;
  // The two-argument integrand form keeps abscissas off the endpoints.
  double re = ts.integrate([&](double x, double) { return f(x).real(); }, a, b, tol, &err_re, &l1);
  double im = ts.integrate([&](double x, double) { return f(x).imag(); }, a, b, tol, &err_im, &l1);
  return {cplx(re, im), std::hypot(err_re * std::max(1.0, std::abs(re)), err_im * std::max(1.0, std::abs(im)))};
}

/// tanh-sinh quadrature of a real integrand; the error is an absolute estimate.
template <class F>
std::pair<double, double> tanh_sinh_real(F&& f, double a, double b, double tol = 1e-13) {
  boost::math::quadrature::tanh_sinh<double> ts(15);
  double err = 0, l1 = 0;
  double v = ts.integrate([&](double x, double) { return f(x); }, a, b, tol, &err, &l1);
  return {v, err * std::max(1.0, l1)};
}

/// Adaptive Gauss-Kronrod (15-point) of a real integrand.
template <class F>
std::pair<double, double> gauss_kronrod(F&& f, double a, double b, double tol = 1e-13, unsigned depth = 20) {
  double err = 0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, depth, tol, &err);
  return {v, err};
}

/// Fixed 20-point Gauss-Legendre rule on [a, b] for complex integrands.
template <class F>
cplx gauss_legendre_panel(F&& f, double a, double b) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  cplx sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      sum += w[i] * f(c);
    } else {
      sum += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
    }
  }
  return sum * h;
}

inline constexpr int kGaussLegendreNodes = 20;

/// Wrap an angle to [0, 2*pi).
inline double wrap_two_pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Wrap an angle to (-pi, pi].
inline double wrap_pi(double x) {
  double r = wrap_two_pi(x + kPi) - kPi;
  if (r <= -kPi) r += kTwoPi;
  return r;
}

}  // namespace numerics
}  // namespace zdl
