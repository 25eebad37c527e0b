#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "zdl/burgers.hpp"

using namespace zdl;
using Catch::Matchers::WithinAbs;
using fourier::PeriodicSignal;

namespace {

const fourier::SingleWellProfile& cosine_profile() {
  static const auto p = fourier::classify_single_well(PeriodicSignal::cosine(1.0));
  return p;
}

}  // namespace

TEST_CASE("breaking points of the cosine") {
  auto b = burgers::breaking_points(cosine_profile());
  CHECK_THAT(b.xi_plus, WithinAbs(3 * kPi / 2, 1e-10));
  CHECK_THAT(b.t_plus, WithinAbs(0.5, 1e-12));
  CHECK_THAT(b.x_plus, WithinAbs(3 * kPi / 2, 1e-10));
  CHECK(b.t_minus < 0.0);
  auto p2 = fourier::classify_single_well(PeriodicSignal::cosine(2.0));
  CHECK_THAT(burgers::breaking_points(p2).t_plus, WithinAbs(0.25, 1e-12));
}

TEST_CASE("single branch before breaking") {
  const auto& p = cosine_profile();
  for (double x : {0.0, 1.0, 3.0, 5.5}) {
    auto b = burgers::branches(p, 0.0, x);
    REQUIRE(b.count() == 1);
    CHECK_THAT(b.values[0], WithinAbs(-std::cos(x), 1e-13));
  }
  auto b = burgers::branches(p, 0.25, kPi);
  REQUIRE(b.count() == 1);
  double v = oracle::single_branch([](double y) { return -std::cos(y); }, 0.25, kPi, -1.0, 1.0);
  CHECK_THAT(b.values[0], WithinAbs(v, 1e-12));
  burgers::CharacteristicMap map(p, 0.5 - 2e-3);
  for (int j = 0; j < 400; ++j) CHECK(map.branches(kTwoPi * (j + 0.5) / 400).count() == 1);
}

TEST_CASE("three branches right after breaking") {
  auto b = burgers::branches(cosine_profile(), 1.0, 3 * kPi / 2 + 0.01);
  REQUIRE(b.count() == 3);
  CHECK(b.values[0] < b.values[1]);
  CHECK(b.values[1] < b.values[2]);
  CHECK_THAT(burgers::signed_sum(b), WithinAbs(b.values[0] - b.values[1] + b.values[2], 0.0));
  CHECK(burgers::signed_sum(b) <= 0.0);
}

TEST_CASE("signed sum definition") {
  burgers::BranchSet one{0.0, 0.0, {0.3}, {0.0}, false};
  CHECK(burgers::signed_sum(one) == 0.3);
  burgers::BranchSet two{0.0, 0.0, {0.1, 0.2}, {0.0, 0.0}, false};
  CHECK_THROWS_AS(burgers::signed_sum(two), Error);
}

TEST_CASE("branch parity and implicit residual at random samples") {
  auto u = fourier::rotate_min_to_origin(PeriodicSignal({0.0, cplx(-0.5), cplx(0.0, -0.025)})).first;
  auto asym = fourier::classify_single_well(u);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> ut(0.0, 2.0), ux(0.0, kTwoPi);
  for (const fourier::SingleWellProfile* p : {&cosine_profile(), static_cast<const fourier::SingleWellProfile*>(&asym)}) {
    const auto& sig = p->signal();
    double worst = 0.0;
    int odd = 0;
    const int samples = 5000;
    for (int i = 0; i < samples; ++i) {
      double t = ut(rng), x = ux(rng);
      auto b = burgers::branches(*p, t, x);
      odd += b.count() % 2;
      for (double v : b.values) worst = std::max(worst, std::abs(v - sig(x - 2.0 * v * t)));
    }
    CHECK(odd == samples);
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("Fourier coefficients of u_alt: integral formula against direct quadrature") {
  const auto& p = cosine_profile();
  for (double t : {0.0, 0.25, 0.75, 1.0}) {
    burgers::CharacteristicMap map(p, t);
    for (int k = 1; k <= 3; ++k) {
      cplx formula = burgers::fourier_ualt(p, t, k);
      cplx direct = oracle::ualt_fourier_direct(map, k);
      CHECK(std::abs(formula - direct) <= 1e-5);
      CHECK(std::abs(burgers::fourier_ualt(p, t, -k) - std::conj(formula)) <= 1e-14);
    }
  }
  for (int k = 1; k <= 3; ++k) {
    CHECK(std::abs(burgers::fourier_ualt(p, 0.0, k) - fourier::fourier_via_branches(p, k)) <= 1e-12);
  }
}

TEST_CASE("L2 norm of u_alt is conserved before breaking and drops after") {
  const auto& p = cosine_profile();
  const double n0 = std::sqrt(0.5);
  CHECK_THAT(burgers::l2_norm_ualt(p, 0.0), WithinAbs(n0, 1e-10));
  CHECK_THAT(burgers::l2_norm_ualt(p, 0.25), WithinAbs(n0, 1e-6));
  CHECK(burgers::l2_norm_ualt(p, 0.6) < n0 - 1e-3);
}

TEST_CASE("fold positions appear only after breaking") {
  const auto& p = cosine_profile();
  CHECK(burgers::CharacteristicMap(p, 0.4).fold_positions().empty());
  CHECK(burgers::CharacteristicMap(p, 1.0).fold_positions().size() == 2);
}
