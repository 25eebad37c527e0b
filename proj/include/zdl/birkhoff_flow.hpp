#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "zdl/error.hpp"
#include "zdl/lax_spectral.hpp"
#include "zdl/numerics.hpp"
#include "zdl/periodic_signal.hpp"
#include "zdl/single_well.hpp"

namespace zdl::flow {

using fourier::PeriodicSignal;
using fourier::SingleWellProfile;
using lax::LaxSpectrum;
using lax::ShiftRoute;
using lax::ShiftSystem;

/// BO frequencies omega_n = eps n^2 - 2 sum_{k>=1} min(k, n) gamma_k for
/// n = 0..size(); the extra last entry serves the last row of M(t).
inline std::vector<double> frequencies(const LaxSpectrum& s) {
  const int M = s.size();
  // sum_k min(k, n) gamma_k = sum_{j=1}^{n} sum_{k>=j} gamma_k.
  std::vector<double> tail(M + 2, 0.0);
  for (int k = M - 1; k >= 1; --k) tail[k] = tail[k + 1] + s.gaps[k];
  std::vector<double> omega(M + 1, 0.0);
  double acc = 0.0;
  for (int n = 1; n <= M; ++n) {
    acc += tail[n];
    omega[n] = s.epsilon * n * n - 2.0 * acc;
  }
  return omega;
}

/// Frequencies of the third Hamiltonian of the hierarchy:
///   eps^2 n^3 + eps n sum_p p gamma_p - 3 eps sum_p min(p, n)^2 gamma_p
///   + 3 sum_{p,q} min(p, q, n) gamma_p gamma_q,   n = 0..size().
inline std::vector<double> hierarchy_frequencies(const LaxSpectrum& s) {
  const int M = s.size();
  const double eps = s.epsilon;
  std::vector<double> tail(M + 2, 0.0);
  for (int k = M - 1; k >= 1; --k) tail[k] = tail[k + 1] + s.gaps[k];
  double first = 0.0;
  for (int p = 1; p < M; ++p) first += p * s.gaps[p];
  std::vector<double> omega(M + 1, 0.0);
  for (int n = 1; n <= M; ++n) {
    double sq = 0.0, pair = 0.0;
    for (int p = 1; p < M; ++p) {
      double m = std::min(p, n);
      sq += m * m * s.gaps[p];
    }
    // sum_{p,q} min(p, q, n) gamma_p gamma_q = sum_{j=1}^{n} (sum_{p>=j} gamma_p)^2.
    for (int j = 1; j <= n; ++j) pair += tail[j] * tail[j];
    omega[n] = eps * eps * n * n * n + eps * n * first - 3.0 * eps * sq + 3.0 * pair;
  }
  return omega;
}

/// Birkhoff coordinates carried by the flow: gaps and eigenvalues are
/// conserved, theta_n(t) = theta_n + omega_n t.
struct FlowState {
  std::shared_ptr<const LaxSpectrum> spectrum;
  double t = 0.0;
  std::vector<double> omegas;

  /// Evolved phases theta_n(t) wrapped to (-pi, pi].
  std::vector<double> thetas() const {
    std::vector<double> th(spectrum->size());
    for (int n = 0; n < spectrum->size(); ++n) th[n] = numerics::wrap_pi(spectrum->thetas[n] + omegas[n] * t);
    return th;
  }
};

inline FlowState evolve(std::shared_ptr<const LaxSpectrum> s, double t) {
  if (!std::isfinite(t)) throw Error(ErrorKind::RangeError, "t must be finite");
  FlowState st;
  st.omegas = frequencies(*s);
  st.spectrum = std::move(s);
  st.t = t;
  return st;
}

inline FlowState evolve(const LaxSpectrum& s, double t) {
  return evolve(std::make_shared<const LaxSpectrum>(s), t);
}

/// Flow composition: advancing by dt from time t lands at t + dt.
inline FlowState advance(const FlowState& st, double dt) {
  FlowState out = st;
  out.t += dt;
  return out;
}

/// M(t)(n, p) = M(n, p) e^{i(omega_{n+1} - omega_p) t}, Y_n(t) = Y_n e^{i omega_n t}.
/// Uses the eigenvector route at t = 0 when eigenvectors are present.
inline ShiftSystem evolved_shift(const FlowState& st, std::optional<ShiftRoute> route = std::nullopt) {
  const LaxSpectrum& s = *st.spectrum;
  ShiftRoute r = route.value_or(s.eigenvectors ? ShiftRoute::Eigenvectors : ShiftRoute::Formula);
  ShiftSystem sys = lax::shift_matrix(s, r);
  if (st.t == 0.0) return sys;
  const int M = s.size();
  const auto& w = st.omegas;
  for (int n = 0; n < M; ++n) {
    for (int p = 0; p < M; ++p) sys.M(n, p) *= std::polar(1.0, (w[n + 1] - w[p]) * st.t);
    sys.Y(n) *= std::polar(1.0, w[n] * st.t);
    sys.X(n) = -s.lambdas[n] * sys.Y(n);
  }
  return sys;
}

namespace detail {

// u on the grid from the inversion formula: u = 2 Re Pi u(e^{ix}) - Pi u(0).
inline std::vector<double> reconstruct_unchecked(const ShiftSystem& sys, std::span<const double> grid) {
  lax::InverseEvaluator inv(sys);
  const double mean = inv(0.0).real();
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back(2.0 * inv(std::polar(1.0, x)).real() - mean);
  return out;
}

struct ConventionGate {
  bool passed = false;
  double max_error = 0.0;
};

inline ConventionGate run_convention_gate() {
  ConventionGate g;
  const auto u = PeriodicSignal::cosine(1.0);
  std::vector<double> grid(32);
  for (int j = 0; j < 32; ++j) grid[j] = kTwoPi * j / 32;
  for (double eps : {1.0, 0.5}) {
    auto s = lax::diagonalize(u, eps, 64);
    auto v = reconstruct_unchecked(lax::shift_matrix(s, ShiftRoute::Formula), grid);
    for (std::size_t j = 0; j < grid.size(); ++j) g.max_error = std::max(g.max_error, std::abs(v[j] - u(grid[j])));
  }
  g.passed = g.max_error <= 1e-5;
  return g;
}

}  // namespace detail

/// Round-trip check of the phase and overlap conventions on -cos x at
/// eps = 1 and 0.5 (max error <= 1e-5). Runs once per process.
inline const detail::ConventionGate& convention_gate() {
  static std::once_flag once;
  static detail::ConventionGate gate;
  std::call_once(once, [] { gate = detail::run_convention_gate(); });
  return gate;
}

/// u^eps(t, x) on `grid` from the evolved spectral data (formula route).
inline std::vector<double> reconstruct(const FlowState& st, std::span<const double> grid) {
  if (!convention_gate().passed) {
    throw Error(ErrorKind::ConventionUnvalidated,
                "cosine round trip failed, error " + std::to_string(convention_gate().max_error));
  }
  return detail::reconstruct_unchecked(evolved_shift(st, ShiftRoute::Formula), grid);
}

inline std::vector<double> uniform_grid(int n) {
  std::vector<double> g(n);
  for (int j = 0; j < n; ++j) g[j] = kTwoPi * j / n;
  return g;
}

/// Integrating-factor RK4 pseudospectral solver for
///   u_t = d_x(eps |D| u - u^2),
/// with 2/3 dealiasing of the quadratic term. Returns u(t) at the `modes`
/// equispaced points 2 pi j / modes. Meant for eps >= 0.25, t <= 1.
inline std::vector<double> bo_direct_solve(const PeriodicSignal& u0, double eps, double t, double dt = 1e-4,
                                           int modes = 256) {
  if (!(eps >= 0.25) || !(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::RangeError, "direct solver envelope is eps >= 0.25, 0 <= t <= 1");
  }
  if (!(dt > 0) || modes < 4 * u0.order() + 4 || modes % 2 != 0) {
    throw Error(ErrorKind::RangeError, "bad time step or mode count");
  }
  const int n = modes;
  Eigen::FFT<double> fft;
  std::vector<double> k(n);
  for (int j = 0; j < n; ++j) k[j] = j <= n / 2 ? j : j - n;

  std::vector<cplx> uh;
  {
    std::vector<double> x0 = u0.sample(n);
    fft.fwd(uh, x0);
  }
  const double initial = std::sqrt(u0.squared_norm()) + 1.0;
  auto nonlinear = [&](const std::vector<cplx>& vh) {
    std::vector<double> v;
    std::vector<cplx> tmp(vh);
    fft.inv(v, tmp);
    for (double& a : v) a = a * a;
    std::vector<cplx> w;
    fft.fwd(w, v);
    for (int j = 0; j < n; ++j) w[j] = std::abs(k[j]) > n / 3 ? cplx(0.0) : -kI * k[j] * w[j];
    return w;
  };
  std::vector<cplx> E(n), E2(n);
  for (int j = 0; j < n; ++j) {
    E[j] = std::exp(kI * eps * k[j] * std::abs(k[j]) * (dt / 2));
    E2[j] = E[j] * E[j];
  }
  const long steps = std::lround(t / dt);
  const double h = steps > 0 ? t / steps : 0.0;
  if (steps > 0 && std::abs(h - dt) > 1e-12) {
    for (int j = 0; j < n; ++j) {
      E[j] = std::exp(kI * eps * k[j] * std::abs(k[j]) * (h / 2));
      E2[j] = E[j] * E[j];
    }
  }
  std::vector<cplx> tmp(n);
  for (long s = 0; s < steps; ++s) {
    auto a = nonlinear(uh);
    for (int j = 0; j < n; ++j) tmp[j] = E[j] * (uh[j] + 0.5 * h * a[j]);
    auto b = nonlinear(tmp);
    for (int j = 0; j < n; ++j) tmp[j] = E[j] * uh[j] + 0.5 * h * b[j];
    auto c = nonlinear(tmp);
    for (int j = 0; j < n; ++j) tmp[j] = E2[j] * uh[j] + h * E[j] * c[j];
    auto d = nonlinear(tmp);
    double norm = 0.0;
    for (int j = 0; j < n; ++j) {
      uh[j] = E2[j] * uh[j] + h / 6.0 * (E2[j] * a[j] + 2.0 * E[j] * (b[j] + c[j]) + d[j]);
      norm += std::norm(uh[j]);
    }
    norm = std::sqrt(norm) / n;
    if (!std::isfinite(norm) || norm > 10.0 * initial) {
      throw Error(ErrorKind::BlowupDetected, "solution norm grew tenfold at step " + std::to_string(s));
    }
  }
  std::vector<double> out;
  fft.inv(out, uh);
  return out;
}

/// Approximate Birkhoff data for a single-well profile:
///   small regime (n eps <= -min u):  int_{-lambda_n}^{max u} F = n eps,
///   large regime:                    lambda_n = n eps, gamma_n = 0,
///   theta_0 = 0, theta_{n+1} - theta_n = pi - (x_+(-lambda_n) + x_-(-lambda_n))/2,
/// truncated at n <= ceil((max|u| + 2)/eps) + 64.
inline LaxSpectrum synth_admissible(const SingleWellProfile& p, double eps) {
  if (!(eps > 0)) throw Error(ErrorKind::RangeError, "epsilon must be positive");
  const double sup = std::max(std::abs(p.u_min()), std::abs(p.u_max()));
  const int n_max = static_cast<int>(std::ceil((sup + 2.0) / eps)) + 64;
  const double I = p.integral_of_F(p.u_min(), p.u_max());

  LaxSpectrum s;
  s.epsilon = eps;
  s.truncation = n_max + 1;
  s.synthetic = true;
  s.lambdas.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double target = n * eps;
    if (target <= I) {
      double eta = numerics::bisect(
          [&](double e) { return p.integral_of_F(e, p.u_max()) - target; }, p.u_min(), p.u_max(), 1e-14);
      s.lambdas[n] = -eta;
    } else {
      s.lambdas[n] = target;
    }
  }
  s.gaps.assign(n_max + 1, 0.0);
  for (int n = 1; n <= n_max; ++n) {
    double g = s.lambdas[n] - s.lambdas[n - 1] - eps;
    s.gaps[n] = g < lax::kGapFloor ? 0.0 : g;
  }
  s.thetas.assign(n_max + 1, 0.0);
  for (int n = 0; n < n_max; ++n) {
    const double eta = -s.lambdas[n];
    s.thetas[n + 1] = numerics::wrap_pi(s.thetas[n] + kPi - 0.5 * (p.x_plus(eta) + p.x_minus(eta)));
  }
  lax::assemble_norming_constants(s);
  s.one_overlaps.resize(n_max + 1);
  s.succ_overlaps.assign(n_max + 1, 0.0);
  for (int n = 0; n <= n_max; ++n) {
    double mod = n == 0 ? std::sqrt(s.kappas[0]) : std::sqrt(s.kappas[n] * s.gaps[n]);
    s.one_overlaps[n] = std::polar(mod, s.thetas[n]);
    if (n > 0) s.succ_overlaps[n] = std::sqrt(s.mus[n]);
  }
  s.quality.trusted = n_max + 1;
  return s;
}

}  // namespace zdl::flow
