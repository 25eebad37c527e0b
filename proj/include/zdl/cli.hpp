#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zdl/birkhoff_flow.hpp"
#include "zdl/burgers.hpp"
#include "zdl/error.hpp"
#include "zdl/experiment.hpp"
#include "zdl/io.hpp"
#include "zdl/lax_spectral.hpp"
#include "zdl/periodic_signal.hpp"
#include "zdl/quantization.hpp"
#include "zdl/single_well.hpp"

namespace zdl::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFailure = 3 };

struct Config {
  std::string builtin = "cosine";
  double beta = 1.0;
  std::optional<std::string> signal_path;
  bool rotate = false;
  std::vector<double> epsilons;
  std::vector<double> ts;
  std::vector<int> ks{1};
  std::optional<int> truncation;
  std::string out = ".";
  bool compare_roots = false;
  bool oracle_pde = false;
  bool svg = false;
  int grid = 256;
};

/// Read a JSON config; keys mirror the long flag names with '_' for '-'.
inline void load_config(const std::string& path, Config& c) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ConfigError, "cannot open config " + path);
  nlohmann::json j;
  try {
    f >> j;
    if (j.contains("builtin")) c.builtin = j["builtin"].get<std::string>();
    if (j.contains("beta")) c.beta = j["beta"].get<double>();
    if (j.contains("signal")) c.signal_path = j["signal"].get<std::string>();
    if (j.contains("rotate")) c.rotate = j["rotate"].get<bool>();
    if (j.contains("epsilon")) c.epsilons = j["epsilon"].get<std::vector<double>>();
    if (j.contains("t")) c.ts = j["t"].get<std::vector<double>>();
    if (j.contains("k")) c.ks = j["k"].get<std::vector<int>>();
    if (j.contains("truncation")) c.truncation = j["truncation"].get<int>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("compare_roots")) c.compare_roots = j["compare_roots"].get<bool>();
    if (j.contains("oracle_pde")) c.oracle_pde = j["oracle_pde"].get<bool>();
    if (j.contains("svg")) c.svg = j["svg"].get<bool>();
    if (j.contains("grid")) c.grid = j["grid"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad config: ") + e.what());
  }
}

namespace detail {

inline fourier::PeriodicSignal load_signal(const Config& c) {
  if (c.signal_path) {
    std::ifstream f(*c.signal_path);
    if (!f) throw Error(ErrorKind::ConfigError, "cannot open signal " + *c.signal_path);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ConfigError, std::string("bad signal JSON: ") + e.what());
    }
    auto u = fourier::signal_from_json(j);
    return c.rotate ? fourier::rotate_min_to_origin(u).first : u;
  }
  if (c.builtin != "cosine") throw Error(ErrorKind::ConfigError, "unknown builtin profile '" + c.builtin + "'");
  if (!(c.beta > 0)) throw Error(ErrorKind::ConfigError, "beta must be positive");
  return fourier::PeriodicSignal::cosine(c.beta);
}

inline void require_epsilons(const Config& c, bool descending) {
  if (c.epsilons.empty()) throw Error(ErrorKind::ConfigError, "at least one --epsilon is required");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] > 0)) throw Error(ErrorKind::ConfigError, "epsilon must be positive");
    if (descending && i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) {
      throw Error(ErrorKind::ConfigError, "epsilon list must be strictly descending");
    }
  }
}

inline void require_times(const Config& c) {
  if (c.ts.empty()) throw Error(ErrorKind::ConfigError, "at least one --t is required");
  for (double t : c.ts) {
    if (!(t >= 0)) throw Error(ErrorKind::ConfigError, "t must be nonnegative");
  }
}

inline std::string path_in(const Config& c, const std::string& name) {
  return (std::filesystem::path(c.out) / name).string();
}

inline lax::LaxSpectrum spectrum_for(const fourier::PeriodicSignal& u, double eps, const Config& c) {
  return c.truncation ? lax::diagonalize(u, eps, *c.truncation) : lax::diagonalize_auto(u, eps);
}

inline std::optional<double> cosine_beta(const fourier::PeriodicSignal& u) { return u.cosine_amplitude(); }

inline int cmd_spectrum(const Config& c, std::ostream& out) {
  require_epsilons(c, false);
  auto u = load_signal(c);
  for (double eps : c.epsilons) {
    auto s = spectrum_for(u, eps, c);
    io::CsvWriter::write_file(path_in(c, "spectrum_eps" + io::tag(eps) + ".json"), lax::to_json(s).dump(2) + "\n");
    out << "eps=" << io::tag(eps) << " N=" << s.truncation << " eigenpairs=" << s.size()
        << " parseval_residual=" << io::num(s.squared_norm() - u.squared_norm()) << "\n";
    if (c.compare_roots) {
      auto beta = cosine_beta(u);
      if (!beta) throw Error(ErrorKind::ConfigError, "--compare-roots needs the cosine profile");
      quantization::RootOptions ro;
      ro.nu_max = s.lambdas.back() + eps;
      auto roots = quantization::solve_roots(*beta, eps, ro);
      io::CsvWriter csv({"n", "lambda", "nu", "root_nu", "abs_diff"});
      for (int n = 0; n < s.size(); ++n) {
        const double nu = s.lambdas[n] + eps;
        std::optional<double> best;
        for (const auto& r : roots) {
          if (!best || std::abs(r.nu - nu) < std::abs(*best - nu)) best = r.nu;
        }
        bool close = best && std::abs(*best - nu) < 0.25 * eps;
        csv.row({std::to_string(n), io::num(s.lambdas[n]), io::num(nu), close ? io::num(*best) : "",
                 close ? io::num(std::abs(*best - nu)) : ""});
      }
      csv.save(path_in(c, "spectrum_roots_eps" + io::tag(eps) + ".csv"));
    }
  }
  return kOk;
}

inline int cmd_burgers(const Config& c, std::ostream& out) {
  require_times(c);
  auto u = load_signal(c);
  auto p = fourier::classify_single_well(u);
  auto b = burgers::breaking_points(p);
  nlohmann::json report;
  report["breaking"] = {{"xi_plus", b.xi_plus}, {"t_plus", b.t_plus},   {"x_plus", b.x_plus},
                        {"xi_minus", b.xi_minus}, {"t_minus", b.t_minus}, {"x_minus", b.x_minus}};
  const double norm0 = std::sqrt(u.squared_norm());
  report["norm_initial"] = norm0;
  report["times"] = nlohmann::json::array();
  for (double t : c.ts) {
    burgers::CharacteristicMap map(p, t);
    std::vector<burgers::BranchSet> sets;
    int widest = 0;
    for (int j = 0; j < c.grid; ++j) {
      sets.push_back(map.branches(kTwoPi * j / c.grid));
      widest = std::max(widest, sets.back().count());
    }
    std::vector<std::string> header{"t", "x", "P"};
    for (int i = 0; i < widest; ++i) header.push_back("u" + std::to_string(i));
    header.push_back("u_alt");
    io::CsvWriter csv(header);
    for (const auto& s : sets) {
      std::vector<std::string> row{io::num(t), io::num(s.x), std::to_string((s.count() - 1) / 2)};
      for (int i = 0; i < widest; ++i) row.push_back(i < s.count() ? io::num(s.values[i]) : "");
      row.push_back(io::num(burgers::signed_sum(s)));
      csv.row(row);
    }
    csv.save(path_in(c, "branches_t" + io::tag(t) + ".csv"));
    nlohmann::json entry;
    entry["t"] = t;
    entry["tangency_retries"] = std::count_if(sets.begin(), sets.end(), [](const auto& s) { return s.retried; });
    const double norm_alt = burgers::l2_norm_ualt(p, t);
    entry["norm_ualt"] = norm_alt;
    entry["norm_drop"] = norm0 - norm_alt;
    entry["folds"] = map.fold_positions();
    entry["fourier"] = nlohmann::json::array();
    for (int k : c.ks) {
      cplx v = burgers::fourier_ualt(p, t, k);
      entry["fourier"].push_back({{"k", k}, {"re", v.real()}, {"im", v.imag()}});
    }
    report["times"].push_back(entry);
    out << "t=" << io::tag(t) << " max_branches=" << widest
        << " norm_ualt=" << io::num(norm_alt) << " norm_drop=" << io::num(norm0 - norm_alt) << "\n";
  }
  io::CsvWriter::write_file(path_in(c, "burgers_report.json"), report.dump(2) + "\n");
  return kOk;
}

inline int cmd_quantize(const Config& c, std::ostream& out) {
  require_epsilons(c, false);
  auto u = load_signal(c);
  auto beta = cosine_beta(u);
  if (!beta) throw Error(ErrorKind::ConfigError, "quantize needs the cosine profile");
  for (double eps : c.epsilons) {
    quantization::RootOptions ro;
    auto roots = quantization::solve_roots(*beta, eps, ro);
    std::optional<lax::LaxSpectrum> s;
    if (c.compare_roots) s = spectrum_for(u, eps, c);
    io::CsvWriter csv({"N", "regime", "nu0_predicted", "nu_solved", "residual_action", "matrix_match_error"});
    for (auto& r : roots) {
      if (s) {
        double best = INFINITY;
        for (double l : s->lambdas) best = std::min(best, std::abs(l + eps - r.nu));
        r.matrix_match_error = best;
      }
      csv.row({std::to_string(r.N), quantization::to_string(r.regime), io::num(r.nu_predicted), io::num(r.nu),
               io::num(r.residual_action), r.matrix_match_error ? io::num(*r.matrix_match_error) : ""});
    }
    csv.save(path_in(c, "roots_eps" + io::tag(eps) + ".csv"));
    out << "eps=" << io::tag(eps) << " roots=" << roots.size()
        << " small_dev=" << io::num(quantization::scaled_max_deviation(roots, quantization::Regime::Small, eps))
        << " large_dev=" << io::num(quantization::scaled_max_deviation(roots, quantization::Regime::Large, eps))
        << "\n";
  }
  return kOk;
}

inline int cmd_evolve(const Config& c, std::ostream& out) {
  require_epsilons(c, false);
  require_times(c);
  auto u = load_signal(c);
  auto grid = flow::uniform_grid(c.grid);
  for (double eps : c.epsilons) {
    lax::LaxSpectrum s;
    if (cosine_beta(u)) {
      s = spectrum_for(u, eps, c);
    } else {
      s = flow::synth_admissible(fourier::classify_single_well(u), eps);
    }
    auto shared = std::make_shared<const lax::LaxSpectrum>(std::move(s));
    for (double t : c.ts) {
      auto v = flow::reconstruct(flow::evolve(shared, t), grid);
      std::vector<double> pde;
      if (c.oracle_pde) pde = flow::bo_direct_solve(u, eps, t, 1e-4, c.grid);
      io::CsvWriter csv(c.oracle_pde ? std::vector<std::string>{"x", "u_eps", "u_pde", "abs_diff"}
                                     : std::vector<std::string>{"x", "u_eps"});
      double worst = 0.0;
      for (int j = 0; j < c.grid; ++j) {
        if (c.oracle_pde) {
          double d = std::abs(v[j] - pde[j]);
          worst = std::max(worst, d);
          csv.row({io::num(grid[j]), io::num(v[j]), io::num(pde[j]), io::num(d)});
        } else {
          csv.row({io::num(grid[j]), io::num(v[j])});
        }
      }
      csv.save(path_in(c, "evolve_eps" + io::tag(eps) + "_t" + io::tag(t) + ".csv"));
      out << "eps=" << io::tag(eps) << " t=" << io::tag(t);
      if (c.oracle_pde) out << " max_abs_diff_pde=" << io::num(worst);
      out << "\n";
    }
  }
  return kOk;
}

inline int cmd_zdl(const Config& c, std::ostream& out) {
  require_epsilons(c, true);
  require_times(c);
  auto u = load_signal(c);
  auto p = fourier::classify_single_well(u);
  experiment::ZdlOptions opts;
  opts.truncation = c.truncation;
  auto table = experiment::zdl_experiment(p, c.ks, c.ts, c.epsilons, opts);
  io::CsvWriter csv({"epsilon", "t", "k", "fourier_eps_re", "fourier_eps_im", "fourier_burgers_re",
                     "fourier_burgers_im", "abs_error"});
  for (const auto& r : table.rows) {
    csv.row({io::num(r.epsilon), io::num(r.t), std::to_string(r.k), io::num(r.fourier_eps.real()),
             io::num(r.fourier_eps.imag()), io::num(r.fourier_burgers.real()), io::num(r.fourier_burgers.imag()),
             io::num(r.abs_error)});
  }
  csv.save(path_in(c, "zdl_table.csv"));

  nlohmann::json m;
  m["profile"] = fourier::to_json(u);
  m["epsilon"] = c.epsilons;
  m["t"] = c.ts;
  m["k"] = c.ks;
  m["tolerances"] = {{"gap_floor", lax::kGapFloor}, {"edge_mass", lax::kEdgeMass}, {"truncation_drift", 1e-10}};
  m["cells"] = nlohmann::json::array();
  for (const auto& cell : table.cells) {
    nlohmann::json jc{{"epsilon", cell.epsilon},   {"source", cell.source},
                      {"truncation", cell.truncation}, {"eigenpairs", cell.size},
                      {"fallback_entries", cell.fallback_entries}};
    jc["truncation_drift"] = std::isnan(cell.truncation_drift) ? nlohmann::json(nullptr) : nlohmann::json(cell.truncation_drift);
    m["cells"].push_back(jc);
  }
  m["table"] = "zdl_table.csv";
  if (c.svg) {
    std::vector<io::Series> series;
    for (double t : c.ts) {
      for (int k : c.ks) {
        io::Series s;
        s.label = "t=" + io::tag(t) + " k=" + std::to_string(k);
        for (double eps : c.epsilons) {
          s.x.push_back(eps);
          s.y.push_back(table.error_at(eps, t, k).value_or(NAN));
        }
        series.push_back(s);
      }
    }
    io::CsvWriter::write_file(path_in(c, "zdl_error.svg"),
                              io::svg_plot(series, "Fourier coefficient error", "epsilon", "abs error", true, true));
    m["plots"] = {"zdl_error.svg"};
  }
  io::CsvWriter::write_file(path_in(c, "zdl_manifest.json"), m.dump(2) + "\n");
  for (const auto& r : table.rows) {
    out << "eps=" << io::tag(r.epsilon) << " t=" << io::tag(r.t) << " k=" << r.k
        << " abs_error=" << io::num(r.abs_error) << "\n";
  }
  return kOk;
}

}  // namespace detail

/// Entry point shared by the zdl executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical laboratory for the zero-dispersion limit of periodic Benjamin-Ono"};
  app.require_subcommand(1);
  Config cfg;
  std::string config_path;
  std::vector<double> eps_flag, t_flag;
  std::vector<int> k_flag;
  int truncation = 0;
  std::string builtin, signal, outdir;
  double beta = 0;

  auto* o_config = app.add_option("--config", config_path, "JSON config; flags override it");
  auto* o_builtin = app.add_option("--builtin", builtin, "built-in profile (cosine)");
  auto* o_beta = app.add_option("--beta", beta, "amplitude of -beta cos x");
  auto* o_signal = app.add_option("--signal", signal, "signal JSON {K, coeffs}");
  auto* o_rotate = app.add_flag("--rotate", "rotate the signal minimum to x = 0");
  auto* o_eps = app.add_option("--epsilon", eps_flag, "dispersion parameter (repeatable)");
  auto* o_t = app.add_option("--t", t_flag, "time (repeatable)");
  auto* o_k = app.add_option("--k", k_flag, "Fourier mode (repeatable)");
  auto* o_trunc = app.add_option("--truncation", truncation, "Hardy-space truncation N");
  auto* o_out = app.add_option("--out", outdir, "existing output directory");
  auto* o_roots = app.add_flag("--compare-roots", "compare with roots of the eigenvalue equation");
  auto* o_pde = app.add_flag("--oracle-pde", "compare with the direct pseudospectral solver");
  auto* o_svg = app.add_flag("--svg", "write SVG plots");
  int grid = 0;
  auto* o_grid = app.add_option("--grid", grid, "number of x samples");

  std::string command;
  const std::pair<const char*, const char*> commands[] = {
      {"spectrum", "Lax eigenvalues and norming constants per epsilon"},
      {"burgers", "multivalued Burgers branches, u_alt and its Fourier modes"},
      {"quantize", "roots of the cosine eigenvalue equation"},
      {"evolve", "Benjamin-Ono solution on an x grid via the Birkhoff flow"},
      {"zdl", "convergence table of the approximation against Burgers"}};
  for (const auto& [name, about] : commands) {
    auto* sub = app.add_subcommand(name, about);
    sub->fallthrough();
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (o_config->count()) load_config(config_path, cfg);
    if (o_builtin->count()) cfg.builtin = builtin;
    if (o_beta->count()) cfg.beta = beta;
    if (o_signal->count()) cfg.signal_path = signal;
    if (o_rotate->count()) cfg.rotate = true;
    if (o_eps->count()) cfg.epsilons = eps_flag;
    if (o_t->count()) cfg.ts = t_flag;
    if (o_k->count()) cfg.ks = k_flag;
    if (o_trunc->count()) cfg.truncation = truncation;
    if (o_out->count()) cfg.out = outdir;
    if (o_roots->count()) cfg.compare_roots = true;
    if (o_pde->count()) cfg.oracle_pde = true;
    if (o_svg->count()) cfg.svg = true;
    if (o_grid->count()) cfg.grid = grid;
    if (cfg.grid < 8) throw Error(ErrorKind::ConfigError, "grid must be at least 8");
    if (!std::filesystem::is_directory(cfg.out)) {
      throw Error(ErrorKind::ConfigError, "output directory does not exist: " + cfg.out);
    }
    if (command == "spectrum") return detail::cmd_spectrum(cfg, out);
    if (command == "burgers") return detail::cmd_burgers(cfg, out);
    if (command == "quantize") return detail::cmd_quantize(cfg, out);
    if (command == "evolve") return detail::cmd_evolve(cfg, out);
    return detail::cmd_zdl(cfg, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return is_validation_error(e.kind()) ? kConfigError : kNumericalFailure;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace zdl::cli
