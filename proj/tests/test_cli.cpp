#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "zdl/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "zdl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = zdl::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("zdl_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("spectrum command writes JSON and root comparison") {
  auto d = fresh_dir("spectrum");
  auto r = run({"spectrum", "--builtin", "cosine", "--beta", "1", "--epsilon", "0.25", "--compare-roots", "--out",
                d.string()});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(slurp(d / "spectrum_eps0.25.json"));
  CHECK(j.at("lambdas").at(0).get<double>() >= -1.0 - 1e-8);
  CHECK(j.at("quality").at("truncation_drift").get<double>() < 1e-10);
  auto csv = slurp(d / "spectrum_roots_eps0.25.csv");
  CHECK(csv.rfind("n,lambda,nu,root_nu,abs_diff\n", 0) == 0);
}

TEST_CASE("validation failures exit with code 2") {
  auto d = fresh_dir("validation");
  CHECK(run({"spectrum", "--out", d.string()}).code == 2);
  CHECK(run({"zdl", "--t", "0", "--out", d.string()}).code == 2);
  CHECK(run({"zdl", "--epsilon", "0.1", "--epsilon", "0.2", "--t", "0", "--out", d.string()}).code == 2);
  CHECK(run({"zdl", "--epsilon", "0.2", "--t", "0", "--out", (d / "missing").string()}).code == 2);
  CHECK(run({"spectrum", "--epsilon", "0.5", "--builtin", "square", "--out", d.string()}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  // Outside the direct solver envelope.
  CHECK(run({"evolve", "--epsilon", "0.1", "--t", "0.1", "--oracle-pde", "--out", d.string()}).code == 2);
  CHECK(run({}).code == 2);
  auto bad = d / "bad_signal.json";
  std::ofstream(bad) << R"({"K": 1, "coeffs": [[0.5, 0], [-0.5, 0]]})";
  auto r = run({"spectrum", "--signal", bad.string(), "--epsilon", "0.5", "--out", d.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("NonZeroMean") != std::string::npos);
}

TEST_CASE("numerical failures exit with code 3") {
  auto d = fresh_dir("numerical");
  // The quadrature floor of the eigenvalue equation.
  auto r = run({"quantize", "--epsilon", "0.00005", "--out", d.string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("QuadratureBudgetExceeded") != std::string::npos);
}

TEST_CASE("burgers command reports branches and the norm drop") {
  auto d = fresh_dir("burgers");
  auto r = run({"burgers", "--t", "0", "--t", "0.6", "--t", "1.0", "--k", "1", "--grid", "64", "--out", d.string()});
  REQUIRE(r.code == 0);
  auto rep = nlohmann::json::parse(slurp(d / "burgers_report.json"));
  CHECK(std::abs(rep.at("breaking").at("t_plus").get<double>() - 0.5) < 1e-12);
  const auto& times = rep.at("times");
  CHECK(std::abs(times.at(0).at("norm_drop").get<double>()) < 1e-8);
  CHECK(times.at(1).at("norm_drop").get<double>() > 1e-3);
  CHECK(times.at(0).at("tangency_retries").get<int>() == 0);
  auto csv0 = slurp(d / "branches_t0.csv");
  CHECK(csv0.rfind("t,x,P,u0,u_alt\n", 0) == 0);
  auto csv1 = slurp(d / "branches_t1.csv");
  CHECK(csv1.find(",1,") != std::string::npos);
}

TEST_CASE("quantize command writes root tables") {
  auto d = fresh_dir("quantize");
  auto r = run({"quantize", "--epsilon", "0.25", "--compare-roots", "--out", d.string()});
  REQUIRE(r.code == 0);
  auto csv = slurp(d / "roots_eps0.25.csv");
  CHECK(csv.rfind("N,regime,nu0_predicted,nu_solved,residual_action,matrix_match_error\n", 0) == 0);
  CHECK(csv.find("small") != std::string::npos);
  CHECK(csv.find("large") != std::string::npos);
}

TEST_CASE("evolve command with the PDE oracle") {
  auto d = fresh_dir("evolve");
  auto r = run({"evolve", "--epsilon", "0.5", "--t", "0.2", "--oracle-pde", "--grid", "128", "--out", d.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(d / "evolve_eps0.5_t0.2.csv"));
  auto pos = r.out.find("max_abs_diff_pde=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 17)) <= 2e-3);
}

TEST_CASE("zdl command: table, manifest, plot and reproducibility") {
  auto d = fresh_dir("zdl");
  auto cfg = d / "config.json";
  std::ofstream(cfg) << R"({"epsilon": [0.4, 0.2], "t": [0.0, 1.0], "k": [1, 2], "svg": true})";
  auto r = run({"zdl", "--config", cfg.string(), "--out", d.string()});
  REQUIRE(r.code == 0);
  auto table = slurp(d / "zdl_table.csv");
  CHECK(table.rfind("epsilon,t,k,fourier_eps_re,fourier_eps_im,fourier_burgers_re,fourier_burgers_im,abs_error\n", 0) ==
        0);
  auto m = nlohmann::json::parse(slurp(d / "zdl_manifest.json"));
  CHECK(m.at("cells").size() == 2);
  CHECK(m.at("cells").at(0).contains("fallback_entries"));
  CHECK(slurp(d / "zdl_error.svg").find("<svg") != std::string::npos);
  // Flags override the config file.
  auto r2 = run({"zdl", "--config", cfg.string(), "--epsilon", "0.4", "--out", d.string()});
  REQUIRE(r2.code == 0);
  CHECK(nlohmann::json::parse(slurp(d / "zdl_manifest.json")).at("cells").size() == 1);
  run({"zdl", "--config", cfg.string(), "--out", d.string()});
  CHECK(slurp(d / "zdl_table.csv") == table);
}
