#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "zdl/error.hpp"
#include "zdl/numerics.hpp"
#include "zdl/periodic_signal.hpp"

namespace zdl::fourier {

/// A signal with one minimum (at x = 0), one maximum at x_max and exactly two
/// inflection points. Provides the inverse branches x_-(eta) on [0, x_max]
/// and x_+(eta) on [x_max, 2 pi], and F(eta) = (x_+ - x_-) / (2 pi).
class SingleWellProfile {
 public:
  static constexpr int kTableSize = 4096;

  const PeriodicSignal& signal() const { return signal_; }
  double u_min() const { return u_min_; }
  double u_max() const { return u_max_; }
  double x_max() const { return x_max_; }
  double xi_minus() const { return xi_minus_; }
  double xi_plus() const { return xi_plus_; }
  /// Set for u = -beta cos x; closed forms are used for the branches and F.
  std::optional<double> cosine_beta() const { return beta_; }

  /// Exact inverse on the rising branch; eta is clamped to [u_min, u_max].
  double x_minus(double eta) const {
    if (beta_) return std::acos(-clamp(eta) / *beta_);
    return invert(eta, minus_table_, 0.0, x_max_, true);
  }

  /// Exact inverse on the falling branch; eta is clamped to [u_min, u_max].
  double x_plus(double eta) const {
    if (beta_) return kTwoPi - std::acos(-clamp(eta) / *beta_);
    return invert(eta, plus_table_, x_max_, kTwoPi, false);
  }

  /// Linear interpolation in the cached eta table (fast, less accurate near
  /// the extrema where the branches have square-root behaviour).
  double x_minus_interp(double eta) const { return interp(eta, minus_table_); }
  double x_plus_interp(double eta) const { return interp(eta, plus_table_); }

  /// Fraction of the period where u > eta; 1 below the minimum, 0 above the maximum.
  double F(double eta) const {
    if (eta <= u_min_) return 1.0;
    if (eta >= u_max_) return 0.0;
    if (beta_) return std::acos(eta / *beta_) / kPi;
    return (x_plus(eta) - x_minus(eta)) / kTwoPi;
  }

  /// int_a^b F(eta) d eta for u_min <= a <= b <= u_max.
  double integral_of_F(double a, double b) const {
    const double tol = 1e-12 * (1.0 + u_max_ - u_min_);
    if (a < u_min_ - tol || b > u_max_ + tol || a > b + tol) {
      throw Error(ErrorKind::RangeError, "integral_of_F needs u_min <= a <= b <= u_max");
    }
    a = clamp(a);
    b = std::max(a, clamp(b));
    if (beta_) {
      const double beta = *beta_;
      auto G = [](double s) {
        s = std::clamp(s, -1.0, 1.0);
        return s * std::acos(s) - std::sqrt(std::max(0.0, 1.0 - s * s));
      };
      return beta / kPi * (G(b / beta) - G(a / beta));
    }
    // Layer-cake form: int_a^b F = (1/2pi) int_0^{2pi} (clamp(u, a, b) - a) dx,
    // split where u crosses a and b. The pieces with u - a integrate exactly
    // from the Fourier coefficients.
    const double xma = x_minus(a), xmb = x_minus(b), xpb = x_plus(b), xpa = x_plus(a);
    double s = primitive(xmb) - primitive(xma) - a * (xmb - xma);
    s += (b - a) * (xpb - xmb);
    s += primitive(xpa) - primitive(xpb) - a * (xpa - xpb);
    return s / kTwoPi;
  }

 private:
  friend SingleWellProfile classify_single_well(const PeriodicSignal&, int);

  struct Table {
    double eta0 = 0, h = 1;
    std::vector<double> x;
  };

  double clamp(double eta) const { return std::clamp(eta, u_min_, u_max_); }

  // int_0^x u(s) ds from the coefficients.
  double primitive(double x) const {
    double s = 0.0;
    const auto& c = signal_.coeffs();
    for (int k = 1; k < static_cast<int>(c.size()); ++k) {
      s += 2.0 * (c[k] * (std::polar(1.0, k * x) - 1.0) / cplx(0.0, k)).real();
    }
    return s;
  }

  double interp(double eta, const Table& t) const {
    if (beta_) return &t == &minus_table_ ? x_minus(eta) : x_plus(eta);
    double e = clamp(eta);
    double pos = (e - t.eta0) / t.h;
    int j = std::clamp(static_cast<int>(pos), 0, kTableSize - 1);
    double w = pos - j;
    return (1.0 - w) * t.x[j] + w * t.x[j + 1];
  }

  double invert(double eta, const Table& t, double lo, double hi, bool rising) const {
    double e = clamp(eta);
    if (e <= u_min_) return rising ? 0.0 : kTwoPi;
    if (e >= u_max_) return x_max_;
    double pos = (e - t.eta0) / t.h;
    int j = std::clamp(static_cast<int>(pos), 0, kTableSize - 1);
    double a = t.x[j], b = t.x[j + 1];
    if (a > b) std::swap(a, b);
    a = std::max(lo, a - 1e-12);
    b = std::min(hi, b + 1e-12);
    auto g = [&](double x) { return signal_(x) - e; };
    if ((g(a) > 0) == (g(b) > 0)) {
      a = lo;
      b = hi;
    }
    return numerics::bisect(g, a, b, 1e-15);
  }

  Table build_table(bool rising) const {
    Table t;
    t.eta0 = u_min_;
    t.h = (u_max_ - u_min_) / kTableSize;
    t.x.resize(kTableSize + 1);
    const double lo = rising ? 0.0 : x_max_;
    const double hi = rising ? x_max_ : kTwoPi;
    t.x[0] = rising ? 0.0 : kTwoPi;
    t.x[kTableSize] = x_max_;
    for (int j = 1; j < kTableSize; ++j) {
      double e = u_min_ + j * t.h;
      t.x[j] = numerics::bisect([&](double x) { return signal_(x) - e; }, lo, hi, 1e-12);
    }
    return t;
  }

  PeriodicSignal signal_;
  double u_min_ = 0, u_max_ = 0, x_max_ = 0, xi_minus_ = 0, xi_plus_ = 0;
  std::optional<double> beta_;
  Table minus_table_, plus_table_;
};

/// Validate the single-well shape on a `grid_size` derivative grid and build
/// the branch tables. The minimum must already sit at x = 0.
inline SingleWellProfile classify_single_well(const PeriodicSignal& u, int grid_size = 8192) {
  if (grid_size < 1024) {
    throw Error(ErrorKind::GridTooCoarse, "classification grid must have at least 1024 points");
  }
  const double scale = std::max(1.0, u.sup_bound());
  const double tol = 1e-9 * scale;
  const double h = kTwoPi / grid_size;

  const double u0 = u(0.0);
  for (int j = 1; j < grid_size; ++j) {
    if (u(j * h) < u0 - tol) {
      throw Error(ErrorKind::MinNotAtOrigin,
                  "u(" + std::to_string(j * h) + ") < u(0); rotate the minimum to the origin first");
    }
  }
  if (std::abs(u.derivative(0.0)) > 1e-7 * scale) {
    throw Error(ErrorKind::MinNotAtOrigin, "u'(0) is not zero");
  }

  // Derivative sign pattern on the open grid: a positive run, at most one
  // zero sample at the turn, then a negative run.
  std::vector<int> sign(grid_size, 0);
  for (int j = 1; j < grid_size; ++j) {
    double d = u.derivative(j * h);
    sign[j] = d > tol ? 1 : (d < -tol ? -1 : 0);
  }
  int j = 1;
  while (j < grid_size && sign[j] == 1) ++j;
  const int last_pos = j - 1;
  int zeros = 0;
  while (j < grid_size && sign[j] == 0) {
    ++zeros;
    ++j;
  }
  while (j < grid_size && sign[j] == -1) ++j;
  if (j != grid_size || last_pos < 1 || zeros > 1 || last_pos + zeros + 1 >= grid_size) {
    throw Error(ErrorKind::NotSingleWell, "u' must be positive on (0, x_max) and negative on (x_max, 2pi)");
  }

  SingleWellProfile p;
  p.signal_ = u;
  {
    double a = last_pos * h, b = (last_pos + zeros + 1) * h;
    p.x_max_ = numerics::bisect([&](double x) { return u.derivative(x); }, a, b, 1e-15);
  }
  p.u_min_ = u0;
  p.u_max_ = u(p.x_max_);

  // Inflection points: u'' changes sign exactly twice on (0, 2pi).
  std::vector<double> roots;
  double prev = u.derivative(h, 2);
  for (int i = 2; i < grid_size; ++i) {
    double cur = u.derivative(i * h, 2);
    if ((cur > 0) != (prev > 0)) {
      roots.push_back(numerics::bisect([&](double x) { return u.derivative(x, 2); }, (i - 1) * h, i * h, 1e-15));
    }
    prev = cur;
  }
  if (roots.size() != 2 || !(roots[0] < p.x_max_ && roots[1] > p.x_max_)) {
    throw Error(ErrorKind::NotSingleWell, "expected one inflection point on each branch, found " +
                                              std::to_string(roots.size()));
  }
  for (double r : roots) {
    if (std::abs(u.derivative(r, 3)) < 1e-8 * scale) {
      throw Error(ErrorKind::DegenerateInflection, "u''' vanishes at inflection point " + std::to_string(r));
    }
  }
  p.xi_minus_ = roots[0];
  p.xi_plus_ = roots[1];

  if (auto beta = u.cosine_amplitude()) {
    p.beta_ = beta;
    p.u_min_ = -*beta;
    p.u_max_ = *beta;
    p.x_max_ = kPi;
    p.xi_minus_ = kPi / 2;
    p.xi_plus_ = 3 * kPi / 2;
  }
  p.minus_table_ = p.build_table(true);
  p.plus_table_ = p.build_table(false);
  return p;
}

/// Shift a signal so that its global minimum sits at x = 0. Returns the
/// rotated signal and the shift s with rotated(x) = u(x + s).
inline std::pair<PeriodicSignal, double> rotate_min_to_origin(const PeriodicSignal& u, int grid_size = 8192) {
  const double h = kTwoPi / grid_size;
  int best = 0;
  double best_val = u(0.0);
  for (int j = 1; j < grid_size; ++j) {
    double v = u(j * h);
    if (v < best_val) {
      best_val = v;
      best = j;
    }
  }
  double a = (best - 1) * h, b = (best + 1) * h;
  double s = best * h;
  if (u.derivative(a) < 0 && u.derivative(b) > 0) {
    s = numerics::bisect([&](double x) { return u.derivative(x); }, a, b, 1e-15);
  }
  return {u.shifted(s), s};
}

/// u_hat(k) recovered from the two inverse branches:
///   u_hat(k) = i/(2 k pi) int_{u_min}^{u_max} (e^{-ik x_+(eta)} - e^{-ik x_-(eta)}) d eta.
/// Negative k gives the conjugate value.
inline cplx fourier_via_branches(const SingleWellProfile& p, int k) {
  if (k == 0) throw Error(ErrorKind::RangeError, "k must be nonzero");
  if (k < 0) return std::conj(fourier_via_branches(p, -k));
  auto integrand = [&](double eta) {
    return std::polar(1.0, -k * p.x_plus(eta)) - std::polar(1.0, -k * p.x_minus(eta));
  };
  auto r = numerics::tanh_sinh_complex(integrand, p.u_min(), p.u_max(), 1e-13);
  if (!std::isfinite(r.value.real()) || !std::isfinite(r.value.imag()) || r.error > 1e-8) {
    throw Error(ErrorKind::QuadratureFailure, "branch integral did not converge");
  }
  return kI / (2.0 * k * kPi) * r.value;
}

}  // namespace zdl::fourier
