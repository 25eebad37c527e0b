#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "zdl/error.hpp"
#include "zdl/numerics.hpp"

namespace zdl::quantization {

/// Eigenvalue condition for u = -beta cos x. With nu = lambda + eps,
///   I(eps, nu) = Re I1 + sin(pi nu / eps) I2,
///   I1 = int_0^pi exp(i (beta sin phi + nu phi) / eps) d phi,
///   I2 = int_0^inf exp((-beta sinh x + nu x) / eps) dx,
/// vanishes exactly at the Lax eigenvalues.

inline constexpr double kMinEpsilon = 1e-4;
/// Gauss-Legendre nodes per oscillation period in the I1 panels.
inline constexpr double kNodesPerPeriod = 24.0;

/// I1 by 20-point Gauss-Legendre panels sized to the local phase derivative
/// so that every panel carries at least 24 nodes per period.
inline cplx oscillatory_I1(double beta, double eps, double nu) {
  if (!(beta >= 0)) throw Error(ErrorKind::RangeError, "beta must be nonnegative");
  if (!(eps >= kMinEpsilon)) {
    throw Error(ErrorKind::QuadratureBudgetExceeded, "epsilon below 1e-4 for the oscillatory integral");
  }
  auto f = [&](double phi) { return std::polar(1.0, (beta * std::sin(phi) + nu * phi) / eps); };
  // Phase S(phi) = (beta sin phi + nu phi)/eps; on [phi, phi + h],
  // |S'| <= (|beta cos phi + nu| + beta h)/eps. Choose h so that the panel
  // spans at most 20/24 of a period.
  const double budget = kTwoPi * numerics::kGaussLegendreNodes / kNodesPerPeriod;
  const double h_max = kPi / 8;
  cplx sum = 0.0;
  double a = 0.0;
  while (a < kPi) {
    const double w = std::abs(beta * std::cos(a) + nu) / eps;
    const double c = beta / eps;
    // Solve c h^2 + w h = budget.
    double h = c > 0 ? (-w + std::sqrt(w * w + 4.0 * c * budget)) / (2.0 * c) : (w > 0 ? budget / w : h_max);
    h = std::min({h, h_max, kPi - a});
    sum += numerics::gauss_legendre_panel(f, a, a + h);
    a += h;
  }
  return sum;
}

/// I2 by adaptive Gauss-Kronrod on [0, x_cut], where x_cut is where the
/// exponent has dropped 45 below its maximum. Returns the value of I2.
inline double laplace_I2(double beta, double eps, double nu) {
  if (!(eps > 0) || !(beta > 0)) throw Error(ErrorKind::RangeError, "beta and epsilon must be positive");
  auto expo = [&](double x) { return (-beta * std::sinh(x) + nu * x) / eps; };
  // The exponent is concave; it peaks at cosh x = nu/beta when nu > beta.
  const double x_peak = nu > beta ? std::acosh(nu / beta) : 0.0;
  const double top = expo(x_peak);
  double hi = std::max(1.0, 2.0 * x_peak);
  while (expo(hi) - top > -45.0) hi *= 2.0;
  const double x_cut = numerics::bisect([&](double x) { return expo(x) - top + 45.0; }, x_peak, hi, 1e-12);
  auto g = [&](double x) { return std::exp(expo(x) - top); };
  double total = 0.0;
  if (x_peak > 0) total += numerics::gauss_kronrod(g, 0.0, x_peak, 1e-13).first;
  total += numerics::gauss_kronrod(g, x_peak, x_cut, 1e-13).first;
  return total * std::exp(top);
}

inline double residual(double beta, double eps, double nu) {
  return oscillatory_I1(beta, eps, nu).real() + std::sin(kPi * nu / eps) * laplace_I2(beta, eps, nu);
}

/// Stationary-phase leading term of I1 for |nu| < beta: the phase
/// beta sin phi + nu phi is stationary at cos phi = -nu/beta.
inline cplx stationary_phase_I1(double beta, double eps, double nu) {
  const double phi0 = std::acos(-nu / beta);
  const double s = beta * std::sin(phi0) + nu * phi0;
  const double s2 = -beta * std::sin(phi0);
  return std::sqrt(kTwoPi * eps / std::abs(s2)) * std::polar(1.0, s / eps - kPi / 4);
}

/// Laplace leading term of I2 for nu > beta, from the interior maximum at cosh x = nu/beta.
inline double laplace_saddle_I2(double beta, double eps, double nu) {
  const double x0 = std::acosh(nu / beta);
  const double s = -beta * std::sinh(x0) + nu * x0;
  const double s2 = beta * std::sinh(x0);
  return std::sqrt(kTwoPi * eps / s2) * std::exp(s / eps);
}

enum class Regime { Small, Large };

inline std::string to_string(Regime r) { return r == Regime::Small ? "small" : "large"; }

/// int_{-nu}^{beta} F(eta) d eta for F(eta) = arccos(eta/beta)/pi, nu in [-beta, beta].
inline double cosine_action(double beta, double nu) {
  auto G = [](double s) {
    s = std::clamp(s, -1.0, 1.0);
    return s * std::acos(s) - std::sqrt(std::max(0.0, 1.0 - s * s));
  };
  return beta / kPi * (G(1.0) - G(-nu / beta));
}

/// Leading-order root nu_N^0.
///   small: int_{-nu}^{beta} F = eps (N + 3/4), with nu in [-beta + delta, beta - delta];
///   large: nu = (N + 1) eps, with nu >= beta + delta.
inline double predict(double beta, double eps, int N, Regime regime, double delta = 0.0) {
  if (N < 0) throw Error(ErrorKind::RangeError, "N must be nonnegative");
  if (regime == Regime::Large) {
    double nu = (N + 1) * eps;
    if (nu < beta + delta) throw Error(ErrorKind::RegimeMismatch, "(N+1) eps below beta + delta");
    return nu;
  }
  const double target = eps * (N + 0.75);
  const double lo = -beta + delta, hi = beta - delta;
  if (target < cosine_action(beta, lo) || target > cosine_action(beta, hi)) {
    throw Error(ErrorKind::RegimeMismatch, "eps (N + 3/4) outside the small-eigenvalue window");
  }
  return numerics::bisect([&](double nu) { return cosine_action(beta, nu) - target; }, lo, hi, 1e-14);
}

struct RootEntry {
  int N = 0;
  Regime regime = Regime::Small;
  double nu_predicted = 0;
  double nu = 0;
  /// I(eps, nu) at the solved root.
  double residual_I = 0;
  /// Action mismatch: |int_{-nu}^{beta} F - eps (N + 3/4)| (small) or |nu - (N+1) eps| (large).
  double residual_action = 0;
  /// Filled by callers comparing against matrix eigenvalues.
  std::optional<double> matrix_match_error;
  double lambda() const { return nu; }
};

struct RootOptions {
  double delta = 0.1;
  /// Upper end of the large regime; defaults to K(delta) = ||u||^2/(2 delta) = beta^2/(4 delta).
  std::optional<double> nu_max;
  double xtol = 1e-11;
};

namespace detail {

inline std::optional<double> predict_or_none(double beta, double eps, int N, Regime r) {
  try {
    return predict(beta, eps, N, r, 0.0);
  } catch (const Error&) {
    return std::nullopt;
  }
}

inline RootEntry solve_one(double beta, double eps, int N, Regime regime, double nu0, double xtol) {
  // Window: 0.45 of the distance to the neighbouring predictions.
  double spacing = std::numeric_limits<double>::infinity();
  for (int dn : {-1, 1}) {
    if (N + dn < 0) continue;
    auto other = predict_or_none(beta, eps, N + dn, regime);
    if (other) spacing = std::min(spacing, std::abs(*other - nu0));
  }
  if (!std::isfinite(spacing)) spacing = eps;
  const double half = 0.45 * spacing;
  auto f = [&](double nu) { return residual(beta, eps, nu); };
  RootEntry e;
  e.N = N;
  e.regime = regime;
  e.nu_predicted = nu0;
  try {
    e.nu = numerics::bisect(f, nu0 - half, nu0 + half, xtol);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::BracketFailure) throw;
    throw Error(ErrorKind::BracketFailure, "no sign change of I near nu=" + std::to_string(nu0) + " (N=" +
                                               std::to_string(N) + ", " + to_string(regime) + ")");
  }
  e.residual_I = f(e.nu);
  e.residual_action = regime == Regime::Small ? std::abs(cosine_action(beta, e.nu) - eps * (N + 0.75))
                                              : std::abs(e.nu - (N + 1) * eps);
  return e;
}

}  // namespace detail

/// Roots of I(eps, .) bracketed around the leading-order predictions, for
/// small-regime predictions in [-beta + delta, beta - delta] and large-regime
/// predictions in [beta + delta, nu_max].
inline std::vector<RootEntry> solve_roots(double beta, double eps, const RootOptions& opts = {}) {
  if (!(beta > 0) || !(eps > 0) || eps > 0.5) throw Error(ErrorKind::RangeError, "need beta > 0 and 0 < eps <= 0.5");
  if (!(opts.delta > 0) || opts.delta >= beta / 4) throw Error(ErrorKind::RangeError, "need 0 < delta < beta/4");
  const double nu_max = opts.nu_max.value_or(beta * beta / (4.0 * opts.delta));
  std::vector<RootEntry> out;
  for (int N = 0;; ++N) {
    auto nu0 = detail::predict_or_none(beta, eps, N, Regime::Small);
    if (!nu0 || *nu0 > beta - opts.delta) break;
    if (*nu0 < -beta + opts.delta) continue;
    out.push_back(detail::solve_one(beta, eps, N, Regime::Small, *nu0, opts.xtol));
  }
  for (int N = std::max(0, static_cast<int>(std::ceil((beta + opts.delta) / eps)) - 1);; ++N) {
    double nu0 = (N + 1) * eps;
    if (nu0 < beta + opts.delta) continue;
    if (nu0 > nu_max) break;
    out.push_back(detail::solve_one(beta, eps, N, Regime::Large, nu0, opts.xtol));
  }
  return out;
}

/// max over roots of the action mismatch, divided by eps^{3/2}.
inline double scaled_max_deviation(const std::vector<RootEntry>& roots, Regime regime, double eps) {
  double m = 0.0;
  for (const auto& r : roots) {
    if (r.regime == regime) m = std::max(m, r.residual_action);
  }
  return m / std::pow(eps, 1.5);
}

/// Closed form of sum over m_1 + ... + m_k = 0 of prod 1/(m_i - c), for
/// c in (0, 1): (-1)^k pi^{k-1} sin(k pi c) / (k c sin(pi c)^k).
inline double toeplitz_closed_form(int k, double c) {
  if (k < 1 || !(c > 0 && c < 1)) throw Error(ErrorKind::RangeError, "need k >= 1 and 0 < c < 1");
  const double s = std::sin(kPi * c);
  return (k % 2 == 0 ? 1.0 : -1.0) * std::pow(kPi, k - 1) * std::sin(k * kPi * c) / (k * c * std::pow(s, k));
}

/// sinc-squared model of the small-regime coefficient:
/// a_n gamma_n gamma_{n+1}/eps^2 ~ sinc(pi F(-lambda_n))^2 with sinc x = sin x / x.
inline double sinc_squared_model(double F) {
  if (F == 0.0) return 1.0;
  const double x = kPi * F;
  const double s = std::sin(x) / x;
  return s * s;
}

}  // namespace zdl::quantization
