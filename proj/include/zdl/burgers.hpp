#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "zdl/error.hpp"
#include "zdl/numerics.hpp"
#include "zdl/single_well.hpp"

namespace zdl::burgers {

using fourier::SingleWellProfile;

/// Gradient catastrophe of u_t + 2 u u_x = 0 started at the inflection points:
/// t = -1/(2 u0'(xi)), x = xi - u0(xi)/u0'(xi) (wrapped to [0, 2pi)).
/// The rising-branch point gives a negative (backward) time.
struct BreakingPoints {
  double xi_plus = 0, t_plus = 0, x_plus = 0;
  double xi_minus = 0, t_minus = 0, x_minus = 0;
};

inline BreakingPoints breaking_points(const SingleWellProfile& p) {
  const auto& u = p.signal();
  BreakingPoints b;
  b.xi_plus = p.xi_plus();
  b.xi_minus = p.xi_minus();
  const double dp = u.derivative(b.xi_plus), dm = u.derivative(b.xi_minus);
  b.t_plus = -1.0 / (2.0 * dp);
  b.t_minus = -1.0 / (2.0 * dm);
  b.x_plus = numerics::wrap_two_pi(b.xi_plus - u(b.xi_plus) / dp);
  b.x_minus = numerics::wrap_two_pi(b.xi_minus - u(b.xi_minus) / dm);
  return b;
}

/// Branch values u_0 < u_1 < ... of the multivalued Burgers solution at (t, x).
struct BranchSet {
  double t = 0, x = 0;
  std::vector<double> values;
  /// Foot points y with y + 2 t u0(y) = x mod 2pi, matching `values`.
  std::vector<double> feet;
  /// True when the values come from x +- 1e-9 after a tangency at x.
  bool retried = false;
  int count() const { return static_cast<int>(values.size()); }
};

/// u_alt = u_0 - u_1 + u_2 - ... over ascending branch values.
inline double signed_sum(const BranchSet& b) {
  if (b.count() % 2 == 0) throw Error(ErrorKind::EvenBranchCount, "signed sum needs an odd branch count");
  double s = 0.0;
  for (int k = 0; k < b.count(); ++k) s += (k % 2 == 0 ? 1.0 : -1.0) * b.values[k];
  return s;
}

/// The characteristic map phi(y) = y + 2 t u0(y) tabulated over one period of
/// y for a fixed t. Roots of phi(y) = x + 2 pi m are bracketed on the grid
/// and refined by bisection.
class CharacteristicMap {
 public:
  static constexpr int kDefaultGrid = 16384;
  static constexpr double kRootTol = 1e-14;
  static constexpr double kDedupTol = 1e-9;

  CharacteristicMap(const SingleWellProfile& p, double t, int grid = kDefaultGrid)
      : profile_(&p), t_(t), grid_(grid), phi_(grid + 1) {
    if (t < 0) throw Error(ErrorKind::RangeError, "t must be nonnegative");
    for (int j = 0; j <= grid_; ++j) phi_[j] = phi(y_at(j));
  }

  double t() const { return t_; }

  double phi(double y) const { return y + 2.0 * t_ * profile_->signal()(y); }

  /// Branches at x; retries at x +- 1e-9 when a tangency gives an even count.
  BranchSet branches(double x) const {
    BranchSet b = scan(x);
    if (b.count() % 2 == 1) return b;
    for (double dx : {1e-9, -1e-9}) {
      BranchSet r = scan(x + dx);
      if (r.count() % 2 == 1) {
        r.x = x;
        r.retried = true;
        return r;
      }
    }
    throw Error(ErrorKind::EvenBranchCount, "even branch count at x=" + std::to_string(x));
  }

  double u_alt(double x) const { return signed_sum(branches(x)); }

  /// x positions in [0, 2pi) of the folds, where phi'(y) = 0.
  std::vector<double> fold_positions() const {
    std::vector<double> out;
    if (t_ == 0.0) return out;
    const auto& u = profile_->signal();
    auto dphi = [&](double y) { return 1.0 + 2.0 * t_ * u.derivative(y); };
    double prev = dphi(0.0);
    for (int j = 1; j <= grid_; ++j) {
      double cur = dphi(y_at(j));
      if ((cur > 0) != (prev > 0)) {
        double y = numerics::bisect(dphi, y_at(j - 1), y_at(j), 1e-15);
        out.push_back(numerics::wrap_two_pi(phi(y)));
      }
      prev = cur;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  double y_at(int j) const { return kTwoPi * j / grid_; }

  BranchSet scan(double x) const {
    const auto& u = profile_->signal();
    std::vector<double> feet;
    for (int j = 0; j < grid_; ++j) {
      double a = phi_[j], b = phi_[j + 1];
      double lo = std::min(a, b), hi = std::max(a, b);
      long m0 = static_cast<long>(std::ceil((lo - x) / kTwoPi));
      long m1 = static_cast<long>(std::floor((hi - x) / kTwoPi));
      for (long m = m0; m <= m1; ++m) {
        const double target = x + kTwoPi * m;
        auto g = [&](double y) { return phi(y) - target; };
        double ga = g(y_at(j)), gb = g(y_at(j + 1));
        if (ga != 0.0 && gb != 0.0 && (ga > 0) == (gb > 0)) continue;
        feet.push_back(numerics::bisect(g, y_at(j), y_at(j + 1), kRootTol));
      }
    }
    for (double& y : feet) y = numerics::wrap_two_pi(y);
    std::sort(feet.begin(), feet.end());
    std::vector<double> unique;
    for (double y : feet) {
      if (!unique.empty() && y - unique.back() < kDedupTol) continue;
      unique.push_back(y);
    }
    if (unique.size() > 1 && unique.front() + kTwoPi - unique.back() < kDedupTol) unique.pop_back();

    BranchSet b;
    b.t = t_;
    b.x = x;
    std::vector<std::pair<double, double>> vy;
    for (double y : unique) vy.emplace_back(u(y), y);
    std::sort(vy.begin(), vy.end());
    for (auto& [v, y] : vy) {
      b.values.push_back(v);
      b.feet.push_back(y);
    }
    return b;
  }

  const SingleWellProfile* profile_;
  double t_;
  int grid_;
  std::vector<double> phi_;
};

inline BranchSet branches(const SingleWellProfile& p, double t, double x) {
  return CharacteristicMap(p, t).branches(x);
}

/// Fourier coefficient of u_alt(t) from the inverse branches:
///   i/(2 k pi) int (e^{-ik(x_+(eta) + 2 eta t)} - e^{-ik(x_-(eta) + 2 eta t)}) d eta.
/// Negative k gives the conjugate value.
inline cplx fourier_ualt(const SingleWellProfile& p, double t, int k) {
  if (k == 0) throw Error(ErrorKind::RangeError, "k must be nonzero");
  if (k < 0) return std::conj(fourier_ualt(p, t, -k));
  auto integrand = [&](double eta) {
    return std::polar(1.0, -k * (p.x_plus(eta) + 2.0 * eta * t)) -
           std::polar(1.0, -k * (p.x_minus(eta) + 2.0 * eta * t));
  };
  auto r = numerics::tanh_sinh_complex(integrand, p.u_min(), p.u_max(), 1e-13);
  if (!std::isfinite(r.value.real()) || !std::isfinite(r.value.imag()) || r.error > 1e-8) {
    throw Error(ErrorKind::QuadratureFailure, "branch integral did not converge");
  }
  return kI / (2.0 * k * kPi) * r.value;
}

/// Split [0, 2pi] at the fold positions.
inline std::vector<double> smooth_pieces(const CharacteristicMap& map) {
  std::vector<double> cuts{0.0};
  for (double f : map.fold_positions()) {
    if (f > cuts.back() + 1e-12 && f < kTwoPi - 1e-12) cuts.push_back(f);
  }
  cuts.push_back(kTwoPi);
  return cuts;
}

/// L2 norm sqrt((1/2pi) int u_alt(t, x)^2 dx), integrated piecewise between folds.
inline double l2_norm_ualt(const SingleWellProfile& p, double t) {
  CharacteristicMap map(p, t);
  auto cuts = smooth_pieces(map);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto [v, err] = numerics::tanh_sinh_real(
        [&](double x) {
          double a = map.u_alt(x);
          return a * a;
        },
        cuts[i], cuts[i + 1], 1e-12);
    total += v;
  }
  return std::sqrt(total / kTwoPi);
}

}  // namespace zdl::burgers
