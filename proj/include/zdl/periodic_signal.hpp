#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>
#include <json.hpp>

#include "zdl/error.hpp"
#include "zdl/numerics.hpp"

namespace zdl::fourier {

/// Real, 2*pi-periodic, zero-mean trigonometric polynomial stored by its
/// nonnegative Fourier coefficients u_hat(0..K); u_hat(-k) = conj(u_hat(k)).
class PeriodicSignal {
 public:
  static constexpr double kMeanTolerance = 1e-12;

  PeriodicSignal() : coeffs_(2, cplx(0.0)) {}

  explicit PeriodicSignal(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2) coeffs_.resize(2, cplx(0.0));
    if (std::abs(coeffs_[0]) > kMeanTolerance) {
      throw Error(ErrorKind::NonZeroMean, "u_hat(0) = " + std::to_string(std::abs(coeffs_[0])));
    }
    coeffs_[0] = 0.0;
  }

  /// u(x) = -beta cos x.
  static PeriodicSignal cosine(double beta) {
    return PeriodicSignal({0.0, cplx(-0.5 * beta, 0.0)});
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }

  const std::vector<cplx>& coeffs() const { return coeffs_; }

  cplx coeff(int k) const {
    int a = std::abs(k);
    if (a > order()) return 0.0;
    return k >= 0 ? coeffs_[a] : std::conj(coeffs_[a]);
  }

  double operator()(double x) const {
    double s = 0.0;
    for (int k = 1; k <= order(); ++k) {
      s += 2.0 * (coeffs_[k] * std::polar(1.0, k * x)).real();
    }
    return s;
  }

  /// d^m u / dx^m at x.
  double derivative(double x, int m = 1) const {
    double s = 0.0;
    for (int k = 1; k <= order(); ++k) {
      cplx factor = std::pow(cplx(0.0, static_cast<double>(k)), m);
      s += 2.0 * (factor * coeffs_[k] * std::polar(1.0, k * x)).real();
    }
    return s;
  }

  /// Mean square (1/2pi) int u^2 dx = 2 sum_{k>=1} |u_hat(k)|^2.
  double squared_norm() const {
    double s = 0.0;
    for (int k = 1; k <= order(); ++k) s += std::norm(coeffs_[k]);
    return 2.0 * s;
  }

  /// Upper bound for sup |u| from the coefficients.
  double sup_bound() const {
    double s = 0.0;
    for (int k = 1; k <= order(); ++k) s += 2.0 * std::abs(coeffs_[k]);
    return s;
  }

  std::vector<double> sample(int n) const {
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) out[j] = (*this)(kTwoPi * j / n);
    return out;
  }

  /// x -> u(x + shift).
  PeriodicSignal shifted(double shift) const {
    std::vector<cplx> c(coeffs_);
    for (int k = 1; k <= order(); ++k) c[k] *= std::polar(1.0, k * shift);
    return PeriodicSignal(std::move(c));
  }

  PeriodicSignal scaled(double factor) const {
    std::vector<cplx> c(coeffs_);
    for (auto& v : c) v *= factor;
    return PeriodicSignal(std::move(c));
  }

  /// beta when the signal is exactly -beta cos x with beta > 0.
  std::optional<double> cosine_amplitude() const {
    for (int k = 2; k <= order(); ++k) {
      if (coeffs_[k] != cplx(0.0)) return std::nullopt;
    }
    if (coeffs_[1].imag() != 0.0 || !(coeffs_[1].real() < 0.0)) return std::nullopt;
    return -2.0 * coeffs_[1].real();
  }

 private:
  std::vector<cplx> coeffs_;
};

/// Build a signal from equispaced samples u(2 pi j / n), keeping modes 0..K.
inline PeriodicSignal from_samples(std::span<const double> values, int K) {
  const int n = static_cast<int>(values.size());
  if (K < 1 || n < 2 * K + 2) {
    throw Error(ErrorKind::GridTooCoarse,
                "need at least 2K+2 samples, got " + std::to_string(n) + " for K=" + std::to_string(K));
  }
  Eigen::FFT<double> fft;
  std::vector<double> in(values.begin(), values.end());
  std::vector<cplx> out;
  fft.fwd(out, in);
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  cplx mean = out[0] / static_cast<double>(n);
  if (std::abs(mean) > 1e-10 * (1.0 + scale)) {
    throw Error(ErrorKind::NonZeroMean, "sample mean " + std::to_string(mean.real()));
  }
  std::vector<cplx> c(K + 1);
  c[0] = 0.0;
  for (int k = 1; k <= K; ++k) c[k] = out[k] / static_cast<double>(n);
  return PeriodicSignal(std::move(c));
}

inline nlohmann::json to_json(const PeriodicSignal& u) {
  nlohmann::json j;
  j["K"] = u.order();
  auto arr = nlohmann::json::array();
  for (const auto& c : u.coeffs()) arr.push_back({c.real(), c.imag()});
  j["coeffs"] = arr;
  return j;
}

inline PeriodicSignal signal_from_json(const nlohmann::json& j) {
  try {
    int K = j.at("K").get<int>();
    const auto& arr = j.at("coeffs");
    if (K < 1 || static_cast<int>(arr.size()) != K + 1) {
      throw Error(ErrorKind::ConfigError, "coeffs must hold K+1 entries");
    }
    std::vector<cplx> c;
    for (const auto& e : arr) c.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    return PeriodicSignal(std::move(c));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed signal JSON: ") + e.what());
  }
}

}  // namespace zdl::fourier
