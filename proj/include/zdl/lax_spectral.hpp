#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "zdl/error.hpp"
#include "zdl/numerics.hpp"
#include "zdl/periodic_signal.hpp"

namespace zdl::lax {

using fourier::PeriodicSignal;

/// Gaps below this are treated as exact zeros.
inline constexpr double kGapFloor = 1e-12;
/// An eigenvector is kept when its squared mass on the top quarter of the
/// retained modes is below this; higher ones feel the truncation edge.
inline constexpr double kEdgeMass = 1e-24;

/// Matrix of L_u = eps D - T_u on span{e^{ijx}, 0 <= j < N}:
/// A(j, k) = eps j delta_jk - u_hat(j - k).
inline Eigen::MatrixXcd build_lax_matrix(const PeriodicSignal& u, double eps, int N) {
  if (!(eps > 0)) throw Error(ErrorKind::RangeError, "epsilon must be positive");
  if (N <= 2 * u.order()) {
    throw Error(ErrorKind::TruncationTooSmall, "truncation N=" + std::to_string(N) + " must exceed 2K");
  }
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  for (int j = 0; j < N; ++j) {
    A(j, j) = eps * j;
    for (int k = std::max(0, j - u.order()); k <= std::min(N - 1, j + u.order()); ++k) {
      A(j, k) -= u.coeff(j - k);
    }
  }
  return A;
}

struct SpectrumQuality {
  double tail_estimate = 0.0;
  double truncation_drift = std::numeric_limits<double>::quiet_NaN();
  int trusted = 0;
};

/// Spectral data of the Lax operator, truncated to the first size() eigenpairs.
/// Index n runs over 0..size()-1. gaps[0] and mus[0] are unused (0 and 1).
struct LaxSpectrum {
  double epsilon = 0.0;
  int truncation = 0;
  std::vector<double> lambdas;
  std::vector<double> gaps;
  std::vector<double> kappas;
  std::vector<double> mus;
  std::vector<double> thetas;
  /// Y_n = <1|f_n>.
  std::vector<cplx> one_overlaps;
  /// <f_n | e^{ix} f_{n-1}> after phase fixing (real positive); entry 0 unused.
  std::vector<cplx> succ_overlaps;
  /// Phase-fixed eigenvectors as columns (Fourier modes 0..N-1), when kept.
  std::optional<Eigen::MatrixXcd> eigenvectors;
  SpectrumQuality quality;
  bool synthetic = false;

  int size() const { return static_cast<int>(lambdas.size()); }

  /// 2 eps sum n gamma_n, equal to the mean square of u.
  double squared_norm() const {
    double s = 0.0;
    for (int n = 1; n < size(); ++n) s += n * gaps[n];
    return 2.0 * epsilon * s;
  }

  /// a_n = mu_{n+1} kappa_n / kappa_{n+1}, for 0 <= n < size() - 1.
  double a_coefficient(int n) const { return mus[n + 1] * kappas[n] / kappas[n + 1]; }
};

namespace detail {

// Product over nonzero gaps p != skip of (1 - gamma_p / (lambda_p - x)).
inline double gap_product(const LaxSpectrum& s, const std::vector<int>& nz, double x, int skip) {
  double prod = 1.0;
  for (int p : nz) {
    if (p == skip) continue;
    prod *= 1.0 - s.gaps[p] / (s.lambdas[p] - x);
  }
  return prod;
}

}  // namespace detail

/// Fill kappas and mus from lambdas and gaps. Gaps past the last index are
/// taken to vanish.
inline void assemble_norming_constants(LaxSpectrum& s) {
  const int M = s.size();
  const double eps = s.epsilon;
  std::vector<int> nz;
  for (int p = 1; p < M; ++p) {
    if (s.gaps[p] > 0.0) nz.push_back(p);
  }
  s.kappas.assign(M, 0.0);
  s.mus.assign(M, 1.0);
  s.kappas[0] = detail::gap_product(s, nz, s.lambdas[0], -1);
  for (int n = 1; n < M; ++n) {
    s.kappas[n] = detail::gap_product(s, nz, s.lambdas[n], n) / (s.lambdas[n] - s.lambdas[0]);
  }
  for (int n = 0; n + 1 < M; ++n) {
    const int q = n + 1;
    double mu = 1.0 - s.gaps[q] / (s.lambdas[q] - s.lambdas[0]);
    for (int p : nz) {
      if (p == q) continue;
      mu *= (1.0 - s.gaps[p] / (s.lambdas[p] - s.lambdas[q])) /
            (1.0 - s.gaps[p] / (s.lambdas[p] - s.lambdas[n] - eps));
    }
    if (mu < -1e-12) {
      throw Error(ErrorKind::NegativeMu, "mu_" + std::to_string(q) + " = " + std::to_string(mu));
    }
    s.mus[q] = std::max(mu, 0.0);
  }
  double tail = 0.0;
  const int last = M - 1;
  for (int n = 0; n < last; ++n) {
    tail = std::max(tail, s.gaps[last] / (s.lambdas[last] - s.lambdas[n]));
  }
  s.quality.tail_estimate = tail;
}

namespace detail {

inline int trusted_prefix(const Eigen::MatrixXcd& V) {
  const int N = static_cast<int>(V.rows());
  const int w = std::max(8, N / 4);
  int n = 0;
  for (; n < V.cols(); ++n) {
    double mass = V.col(n).tail(w).squaredNorm();
    if (mass >= kEdgeMass) break;
  }
  return n;
}

inline double gap_floor(const std::vector<double>& lambdas) {
  double big = 0.0;
  for (double l : lambdas) big = std::max(big, std::abs(l));
  return std::max(kGapFloor, 1e-14 * big);
}

}  // namespace detail

struct DiagonalizeOptions {
  bool keep_eigenvectors = true;
};

/// Diagonalize the truncated Lax matrix, fix eigenvector phases and compute
/// gaps, overlaps, phases and norming constants for the trusted eigenpairs.
inline LaxSpectrum diagonalize(const PeriodicSignal& u, double eps, int N, DiagonalizeOptions opts = {}) {
  if (N < 8) throw Error(ErrorKind::TruncationTooSmall, "diagonalize needs N >= 8");
  Eigen::MatrixXcd A = build_lax_matrix(u, eps, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(A, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenSolverFailure, "Hermitian eigensolver did not converge");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  Eigen::MatrixXcd V = solver.eigenvectors();

  const int M = detail::trusted_prefix(V);
  if (M < 2) throw Error(ErrorKind::TruncationTooSmall, "no eigenpairs clear of the truncation edge");

  LaxSpectrum s;
  s.epsilon = eps;
  s.truncation = N;
  s.quality.trusted = M;
  s.lambdas.assign(ev.data(), ev.data() + M);

  // Phase fixing: <1|f_0> > 0, then <f_n | e^{ix} f_{n-1}> > 0 inductively.
  s.succ_overlaps.assign(M, 0.0);
  {
    cplx v00 = V(0, 0);
    if (std::abs(v00) < 1e-300) throw Error(ErrorKind::PhaseFixFailure, "<1|f_0> vanishes");
    V.col(0) *= std::conj(v00) / std::abs(v00);
  }
  for (int n = 1; n < M; ++n) {
    cplx ov = 0.0;
    for (int j = 1; j < N; ++j) ov += V(j, n) * std::conj(V(j - 1, n - 1));
    if (std::abs(ov) < 1e-13) {
      throw Error(ErrorKind::PhaseFixFailure, "<f_n|e^{ix} f_{n-1}> vanishes at n=" + std::to_string(n));
    }
    V.col(n) *= std::abs(ov) / ov;
    s.succ_overlaps[n] = std::abs(ov);
  }

  const double floor = detail::gap_floor(s.lambdas);
  s.gaps.assign(M, 0.0);
  for (int n = 1; n < M; ++n) {
    double g = s.lambdas[n] - s.lambdas[n - 1] - eps;
    if (g < -1e-8 * (1.0 + std::abs(s.lambdas[n]))) {
      throw Error(ErrorKind::EigenSolverFailure, "negative gap at n=" + std::to_string(n));
    }
    s.gaps[n] = g < floor ? 0.0 : g;
  }

  s.one_overlaps.resize(M);
  s.thetas.assign(M, 0.0);
  for (int n = 0; n < M; ++n) {
    s.one_overlaps[n] = std::conj(V(0, n));
    if (n > 0 && std::abs(s.one_overlaps[n]) > 0) s.thetas[n] = std::arg(s.one_overlaps[n]);
  }
  assemble_norming_constants(s);
  if (opts.keep_eigenvectors) s.eigenvectors = V.leftCols(M);
  return s;
}

/// Eigenvalues only, for truncation studies.
inline Eigen::VectorXd lax_eigenvalues(const PeriodicSignal& u, double eps, int N) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(build_lax_matrix(u, eps, N), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenSolverFailure, "Hermitian eigensolver did not converge");
  }
  return solver.eigenvalues();
}

struct TruncationChoice {
  int N = 0;
  int checked_modes = 0;
  double drift = 0.0;
};

/// Smallest power of two N such that lambda_0 and the next
/// ceil((max u - min u) / eps) + 20 eigenvalues move by less than `tol`
/// when N is doubled.
inline TruncationChoice select_truncation(const PeriodicSignal& u, double eps, double tol = 1e-10,
                                          int max_N = 4096) {
  double lo = 0.0, hi = 0.0;
  for (double v : u.sample(4096)) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const int m = static_cast<int>(std::ceil((hi - lo) / eps)) + 21;
  int N = 32;
  while (N <= 2 * u.order() || N < 2 * m) N *= 2;
  Eigen::VectorXd cur = lax_eigenvalues(u, eps, N);
  while (2 * N <= max_N) {
    Eigen::VectorXd next = lax_eigenvalues(u, eps, 2 * N);
    double drift = (cur.head(m) - next.head(m)).cwiseAbs().maxCoeff();
    if (drift < tol) return {N, m, drift};
    N *= 2;
    cur = std::move(next);
  }
  throw Error(ErrorKind::TruncationTooSmall, "eigenvalues did not settle below N=" + std::to_string(max_N));
}

/// select_truncation followed by diagonalize; doubles N until the trusted
/// prefix covers the checked eigenvalues.
inline LaxSpectrum diagonalize_auto(const PeriodicSignal& u, double eps, DiagonalizeOptions opts = {},
                                    int max_N = 4096) {
  TruncationChoice c = select_truncation(u, eps, 1e-10, max_N);
  int N = c.N;
  for (;;) {
    LaxSpectrum s = diagonalize(u, eps, N, opts);
    s.quality.truncation_drift = c.drift;
    if (s.size() >= c.checked_modes || 2 * N > max_N) return s;
    N *= 2;
  }
}

struct ClosedFormA {
  /// a_n gamma_n gamma_{n+1} / eps^2 from the product formula.
  double normalized = 0.0;
  /// The same quantity from mu_{n+1} kappa_n / kappa_{n+1}.
  double from_definition = 0.0;
  /// a_n itself when both gaps are nonzero.
  std::optional<double> a;
  /// False when the product tail estimate of the spectrum exceeds 1e-8.
  bool tail_ok = true;
};

/// Product formula
///   a_n gamma_n gamma_{n+1} / eps^2 = prod_{p>=0, p!=n} (1 - eps^2/(lambda_p - lambda_n)^2).
/// Indices past the last retained eigenvalue carry zero gaps; their factors
/// telescope to d/(d+1) with d = (lambda_last - lambda_n)/eps.
inline ClosedFormA a_n_closed_form(const LaxSpectrum& s, int n) {
  const int M = s.size();
  if (n < 1 || n + 1 >= M) throw Error(ErrorKind::RangeError, "need 1 <= n < size()-1");
  const double eps = s.epsilon;
  double prod = 1.0;
  for (int p = 0; p < M; ++p) {
    if (p == n) continue;
    double r = eps / (s.lambdas[p] - s.lambdas[n]);
    prod *= 1.0 - r * r;
  }
  double d = (s.lambdas[M - 1] - s.lambdas[n]) / eps;
  prod *= d / (d + 1.0);
  ClosedFormA out;
  out.normalized = prod;
  out.from_definition = s.a_coefficient(n) * s.gaps[n] * s.gaps[n + 1] / (eps * eps);
  if (s.gaps[n] > 0 && s.gaps[n + 1] > 0) out.a = prod * eps * eps / (s.gaps[n] * s.gaps[n + 1]);
  out.tail_ok = s.quality.tail_estimate <= 1e-8;
  return out;
}

enum class ShiftRoute { Eigenvectors, Formula };

/// The shift S in the eigenbasis, M(n, p) = <f_p | S f_n>, together with
/// Y_n = <1|f_n> and X_p = -lambda_p Y_p.
struct ShiftSystem {
  Eigen::MatrixXcd M;
  Eigen::VectorXcd X;
  Eigen::VectorXcd Y;
  double epsilon = 0.0;
  ShiftRoute route = ShiftRoute::Eigenvectors;
  int fallback_entries = 0;
  /// Formula route: true where M(n, p) was taken from the zero-gap fallback.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> fallback;
};

inline ShiftSystem shift_from_eigenvectors(const LaxSpectrum& s) {
  if (!s.eigenvectors) throw Error(ErrorKind::MissingEigenvectors, "spectrum was built without eigenvectors");
  const Eigen::MatrixXcd& V = *s.eigenvectors;
  const int N = static_cast<int>(V.rows());
  Eigen::MatrixXcd SV = Eigen::MatrixXcd::Zero(N, V.cols());
  SV.bottomRows(N - 1) = V.topRows(N - 1);
  ShiftSystem sys;
  sys.epsilon = s.epsilon;
  sys.route = ShiftRoute::Eigenvectors;
  sys.M = SV.adjoint() * V;
  const int M = s.size();
  sys.Y.resize(M);
  sys.X.resize(M);
  for (int n = 0; n < M; ++n) {
    sys.Y(n) = std::conj(V(0, n));
    sys.X(n) = -s.lambdas[n] * sys.Y(n);
  }
  return sys;
}

/// Shift matrix assembled from spectral data alone:
///   M(n, n+1) = sqrt(mu_{n+1}),
///   M(n, p)   = sqrt(mu_{n+1} kappa_p / kappa_{n+1}) sqrt(g_p gamma_{n+1})
///               e^{i(theta_{n+1} - theta_p)} / (lambda_p - lambda_n - eps),
/// with g_0 = 1 and g_p = gamma_p otherwise, and Y_n = sqrt(kappa_n gamma_n) e^{i theta_n}
/// (Y_0 = sqrt(kappa_0)). Entries tied to a zero gap use the eigenvector
/// values when available and the zero-gap limit otherwise.
inline ShiftSystem shift_from_formula(const LaxSpectrum& s) {
  const int M = s.size();
  const double eps = s.epsilon;
  std::optional<ShiftSystem> eig;
  if (s.eigenvectors) eig = shift_from_eigenvectors(s);

  // Values at index M, one past the last: zero gap, lambda_M = lambda_{M-1} + eps.
  auto gap = [&](int n) { return n < M ? s.gaps[n] : 0.0; };
  auto theta = [&](int n) { return n < M ? s.thetas[n] : 0.0; };

  ShiftSystem sys;
  sys.epsilon = eps;
  sys.route = ShiftRoute::Formula;
  sys.M = Eigen::MatrixXcd::Zero(M, M);
  sys.fallback = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(M, M, false);
  sys.Y.resize(M);
  sys.X.resize(M);
  for (int n = 0; n < M; ++n) {
    if (n > 0 && s.gaps[n] == 0.0 && eig) {
      ++sys.fallback_entries;
      sys.Y(n) = eig->Y(n);
    } else {
      double mod = n == 0 ? std::sqrt(s.kappas[0]) : std::sqrt(s.kappas[n] * s.gaps[n]);
      sys.Y(n) = std::polar(mod, s.thetas[n]);
    }
    sys.X(n) = -s.lambdas[n] * sys.Y(n);
  }
  for (int n = 0; n < M; ++n) {
    const int q = n + 1;
    for (int p = 0; p < M; ++p) {
      if (p == q) {
        sys.M(n, p) = std::sqrt(s.mus[q]);
        continue;
      }
      const bool zero = gap(q) == 0.0 || (p >= 1 && s.gaps[p] == 0.0);
      if (zero) {
        ++sys.fallback_entries;
        sys.fallback(n, p) = true;
        sys.M(n, p) = eig ? eig->M(n, p) : cplx(0.0);
        continue;
      }
      const double gp = p == 0 ? 1.0 : s.gaps[p];
      const double denom = s.lambdas[p] - s.lambdas[n] - eps;
      if (std::abs(denom) < 1e-14) {
        throw Error(ErrorKind::ZeroGapDivision, "lambda_p - lambda_n - eps vanishes at (" + std::to_string(n) + ", " +
                                                    std::to_string(p) + ")");
      }
      const double amp = std::sqrt(s.mus[q] * s.kappas[p] / s.kappas[q]) * std::sqrt(gp * gap(q));
      sys.M(n, p) = std::polar(amp / denom, theta(q) - s.thetas[p]);
    }
  }
  return sys;
}

inline ShiftSystem shift_matrix(const LaxSpectrum& s, ShiftRoute route) {
  return route == ShiftRoute::Eigenvectors ? shift_from_eigenvectors(s) : shift_from_formula(s);
}

/// eps Tr(M^k), which reproduces u_hat(k).
inline cplx trace_moment(const ShiftSystem& sys, int k) {
  if (k < 1) throw Error(ErrorKind::RangeError, "k must be >= 1");
  Eigen::MatrixXcd P = sys.M;
  for (int i = 1; i < k; ++i) P = P * sys.M;
  return sys.epsilon * P.trace();
}

/// Evaluates Pi u(z) = <(I - zM)^{-1} X, Y> for many z using one Schur
/// factorization of M.
class InverseEvaluator {
 public:
  explicit InverseEvaluator(const ShiftSystem& sys) : sys_(sys), schur_(sys.M) {
    if (schur_.info() != Eigen::Success) throw Error(ErrorKind::SolveFailure, "Schur factorization failed");
    QhX_ = schur_.matrixU().adjoint() * sys_.X;
  }

  cplx operator()(cplx z) const {
    if (std::abs(z) > 1.0 + 1e-12) throw Error(ErrorKind::RangeError, "need |z| <= 1");
    const Eigen::MatrixXcd& T = schur_.matrixT();
    const int n = static_cast<int>(T.rows());
    Eigen::VectorXcd w(n);
    for (int i = n - 1; i >= 0; --i) {
      cplx acc = QhX_(i);
      for (int j = i + 1; j < n; ++j) acc += z * T(i, j) * w(j);
      cplx d = 1.0 - z * T(i, i);
      if (std::abs(d) < 1e-14) throw Error(ErrorKind::SolveFailure, "I - zM is singular");
      w(i) = acc / d;
    }
    Eigen::VectorXcd v = schur_.matrixU() * w;
    Eigen::VectorXcd r = v - z * (sys_.M * v) - sys_.X;
    if (r.norm() > 1e-9 * (1.0 + sys_.X.norm())) {
      throw Error(ErrorKind::SolveFailure, "residual " + std::to_string(r.norm()));
    }
    return sys_.Y.adjoint() * v;
  }

 private:
  ShiftSystem sys_;
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur_;
  Eigen::VectorXcd QhX_;
};

/// Pi u(z) = sum_{k>=1} u_hat(k) z^k, evaluated from the shift system.
inline cplx invert(const ShiftSystem& sys, cplx z) { return InverseEvaluator(sys)(z); }

inline nlohmann::json to_json(const LaxSpectrum& s) {
  nlohmann::json j;
  j["epsilon"] = s.epsilon;
  j["N"] = s.truncation;
  j["lambdas"] = s.lambdas;
  j["gaps"] = s.gaps;
  j["thetas"] = s.thetas;
  j["kappa"] = s.kappas;
  j["mu"] = s.mus;
  nlohmann::json q;
  q["tail_estimate"] = s.quality.tail_estimate;
  if (std::isnan(s.quality.truncation_drift)) {
    q["truncation_drift"] = nullptr;
  } else {
    q["truncation_drift"] = s.quality.truncation_drift;
  }
  j["quality"] = q;
  return j;
}

/// Rebuild a spectrum (without eigenvectors) from its JSON form.
inline LaxSpectrum spectrum_from_json(const nlohmann::json& j) {
  try {
    LaxSpectrum s;
    s.epsilon = j.at("epsilon").get<double>();
    s.truncation = j.at("N").get<int>();
    s.lambdas = j.at("lambdas").get<std::vector<double>>();
    s.gaps = j.at("gaps").get<std::vector<double>>();
    s.thetas = j.at("thetas").get<std::vector<double>>();
    s.kappas = j.at("kappa").get<std::vector<double>>();
    s.mus = j.at("mu").get<std::vector<double>>();
    const auto& q = j.at("quality");
    s.quality.tail_estimate = q.at("tail_estimate").get<double>();
    if (!q.at("truncation_drift").is_null()) s.quality.truncation_drift = q.at("truncation_drift").get<double>();
    const std::size_t M = s.lambdas.size();
    if (s.gaps.size() != M || s.thetas.size() != M || s.kappas.size() != M || s.mus.size() != M) {
      throw Error(ErrorKind::ConfigError, "spectrum arrays differ in length");
    }
    s.quality.trusted = static_cast<int>(M);
    s.one_overlaps.resize(M);
    s.succ_overlaps.assign(M, 0.0);
    for (std::size_t n = 0; n < M; ++n) {
      double mod = n == 0 ? std::sqrt(s.kappas[0]) : std::sqrt(s.kappas[n] * s.gaps[n]);
      s.one_overlaps[n] = std::polar(mod, s.thetas[n]);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed spectrum JSON: ") + e.what());
  }
}

}  // namespace zdl::lax
