#pragma once

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "zdl/birkhoff_flow.hpp"
#include "zdl/burgers.hpp"
#include "zdl/error.hpp"
#include "zdl/lax_spectral.hpp"

namespace zdl::experiment {

using fourier::SingleWellProfile;

struct ZdlOptions {
  /// Fixed Hardy-space truncation; chosen automatically when empty.
  std::optional<int> truncation;
  /// For -beta cos x, use the eigenvalues of the Lax matrix instead of the
  /// synthetic spectrum.
  bool exact_spectrum_for_cosine = true;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

struct ZdlRow {
  double epsilon = 0, t = 0;
  int k = 0;
  cplx fourier_eps;
  cplx fourier_burgers;
  double abs_error = 0;
};

struct ZdlCell {
  double epsilon = 0;
  std::string source;
  int truncation = 0;
  int size = 0;
  int fallback_entries = 0;
  double truncation_drift = 0;
};

struct ZdlTable {
  std::vector<ZdlRow> rows;
  std::vector<ZdlCell> cells;

  /// abs_error at (eps, t, k), if present.
  std::optional<double> error_at(double eps, double t, int k) const {
    for (const auto& r : rows) {
      if (r.epsilon == eps && r.t == t && r.k == k) return r.abs_error;
    }
    return std::nullopt;
  }
};

/// eps Tr(M(t)^k) against the Fourier coefficients of the alternating
/// Burgers solution, over an eps x t x k grid. Each eps is one task.
inline ZdlTable zdl_experiment(const SingleWellProfile& p, const std::vector<int>& ks, const std::vector<double>& ts,
                               const std::vector<double>& epss, const ZdlOptions& opts = {}) {
  if (epss.empty() || ks.empty() || ts.empty()) throw Error(ErrorKind::ConfigError, "empty eps, t or k list");
  for (std::size_t i = 0; i < epss.size(); ++i) {
    if (!(epss[i] > 0)) throw Error(ErrorKind::ConfigError, "epsilon must be positive");
    if (i > 0 && !(epss[i] < epss[i - 1])) throw Error(ErrorKind::ConfigError, "epsilon list must be descending");
  }
  for (int k : ks) {
    if (k < 1) throw Error(ErrorKind::ConfigError, "k must be >= 1");
  }
  for (double t : ts) {
    if (!(t >= 0)) throw Error(ErrorKind::ConfigError, "t must be nonnegative");
  }

  std::map<std::pair<double, int>, cplx> reference;
  for (double t : ts) {
    for (int k : ks) reference[{t, k}] = burgers::fourier_ualt(p, t, k);
  }

  const bool exact = opts.exact_spectrum_for_cosine && p.cosine_beta().has_value();
  auto run_cell = [&](double eps) {
    std::pair<ZdlCell, std::vector<ZdlRow>> out;
    ZdlCell& cell = out.first;
    cell.epsilon = eps;
    lax::LaxSpectrum s;
    if (exact) {
      s = opts.truncation ? lax::diagonalize(p.signal(), eps, *opts.truncation) : lax::diagonalize_auto(p.signal(), eps);
      cell.source = "lax-matrix";
    } else {
      s = flow::synth_admissible(p, eps);
      cell.source = "synthetic";
    }
    cell.truncation = s.truncation;
    cell.size = s.size();
    cell.truncation_drift = s.quality.truncation_drift;
    auto shared = std::make_shared<const lax::LaxSpectrum>(std::move(s));
    for (double t : ts) {
      auto sys = flow::evolved_shift(flow::evolve(shared, t));
      cell.fallback_entries = std::max(cell.fallback_entries, sys.fallback_entries);
      for (int k : ks) {
        ZdlRow r;
        r.epsilon = eps;
        r.t = t;
        r.k = k;
        r.fourier_eps = lax::trace_moment(sys, k);
        r.fourier_burgers = reference.at({t, k});
        r.abs_error = std::abs(r.fourier_eps - r.fourier_burgers);
        out.second.push_back(r);
      }
    }
    return out;
  };

  ZdlTable table;
  std::vector<std::future<std::pair<ZdlCell, std::vector<ZdlRow>>>> pending;
  std::size_t next = 0;
  auto collect = [&](std::size_t i) {
    auto [cell, rows] = pending[i].get();
    table.cells.push_back(cell);
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  };
  const std::size_t width = std::max(1u, opts.threads);
  std::size_t done = 0;
  while (next < epss.size()) {
    pending.push_back(std::async(std::launch::async, run_cell, epss[next++]));
    if (pending.size() - done >= width) collect(done++);
  }
  while (done < pending.size()) collect(done++);
  return table;
}

}  // namespace zdl::experiment
