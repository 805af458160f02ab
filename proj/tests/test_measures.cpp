#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "sensing/errors.hpp"
#include "sensing/measures.hpp"

using namespace sensing;

namespace {

// Narrow symmetric triangle of half-width w centred at c.
SpectralMeasure bump(double c, double w) {
  const int n = 401;
  std::vector<double> x(n), f(n, 0.0);
  const double lo = c - 1.5 * w, step = 3.0 * w / (n - 1);
  for (int i = 0; i < n; ++i) {
    x[i] = lo + i * step;
    f[i] = std::max(0.0, 1.0 - std::abs(x[i] - c) / w) / w;
  }
  f.front() = f.back() = 0.0;
  double s = 0.0;
  for (double v : f) s += v;
  for (double& v : f) v /= s * step;
  return SpectralMeasure(x, f);
}

}  // namespace

TEST_CASE("semicircle support, mass and moments") {
  const SpectralMeasure sc = semicircle(1.0);
  CHECK(sc.lower() <= -2.0);
  CHECK(sc.upper() >= 2.0);
  CHECK(moment(sc, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(sc.total_mass() - 1.0) < 1e-8);
  CHECK(std::abs(moment(sc, 2) - 1.0) < 1e-6);
  CHECK(std::abs(moment(sc, 1)) < 1e-12);
  const SpectralMeasure sc4 = semicircle(4.0);
  CHECK(sc4.support_radius() >= 4.0);
  CHECK(std::abs(moment(sc4, 2) - 4.0) < 4e-6);
  CHECK(std::abs(moment(sc, 4) - 2.0) < 1e-5);  // Catalan number
  CHECK_THROWS_AS(semicircle(0.0), InvalidParameter);
  CHECK_THROWS_AS(semicircle(-1.0), InvalidParameter);
}

TEST_CASE("Marchenko-Pastur atoms and moments") {
  const SpectralMeasure half = marchenko_pastur(0.5);
  REQUIRE(half.atoms().size() == 1);
  CHECK(half.atoms()[0].location == 0.0);
  CHECK(half.atoms()[0].mass == doctest::Approx(0.5).epsilon(1e-14));
  const SpectralMeasure two = marchenko_pastur(2.0);
  CHECK(two.atoms().empty());
  CHECK(std::abs(moment(two, 1) - 1.0) < 1e-6);
  CHECK(std::abs(moment(two, 2) - 1.5) < 1e-6);
  for (double kappa : {0.25, 0.5, 2.0, 4.0})
    CHECK(std::abs(moment(marchenko_pastur(kappa), 2) - (1.0 + 1.0 / kappa)) < 1e-6);
  // kappa = 1: support [0, 4]
  const SpectralMeasure one = marchenko_pastur(1.0);
  CHECK(one.lower() <= 0.0);
  CHECK(one.upper() >= 4.0);
  const auto [a, b] = one.active_range();
  const double h = one.spacing();
  CHECK(one.grid()[a] > -h);
  CHECK(one.grid()[b] < 4.0 + h);
  CHECK_THROWS_AS(marchenko_pastur(0.0), InvalidParameter);
}

TEST_CASE("symmetrized rectangular Gaussian law") {
  const SpectralMeasure r1 = symmetrized_rect_gaussian(1.0);
  CHECK(std::abs(moment(r1, 2) - 1.0) < 1e-6);
  CHECK(wasserstein2(r1, semicircle(1.0)) < 1e-4);
  const SpectralMeasure r4 = symmetrized_rect_gaussian(0.25);
  CHECK(std::abs(moment(r4, 2) - 2.0) < 1e-3);
  CHECK(r4.is_symmetric(1e-8));
  CHECK_THROWS_AS(symmetrized_rect_gaussian(0.0), InvalidParameter);
  CHECK_THROWS_AS(symmetrized_rect_gaussian(1.5), InvalidParameter);
}

TEST_CASE("symmetric constructors are even") {
  CHECK(semicircle(1.0).is_symmetric(1e-8));
  CHECK(semicircle(3.0).is_symmetric(1e-8));
  CHECK(symmetrized_rect_gaussian(0.5).is_symmetric(1e-8));
}

TEST_CASE("Cauchy transform") {
  const SpectralMeasure sc = semicircle(1.0);
  const cplx g = cauchy_transform(sc, cplx(0, 2));
  CHECK(std::abs(g - cplx(0, 1.0 - std::sqrt(2.0))) < 1e-6);
  const cplx g0 = cauchy_transform(SpectralMeasure::point_mass(0.0), cplx(0, 1));
  CHECK(std::abs(g0 - cplx(0, -1)) < 1e-15);
  for (const SpectralMeasure& mu : {sc, marchenko_pastur(0.5), symmetrized_rect_gaussian(0.3)}) {
    const cplx z(3e5, 7e5);
    CHECK(std::abs(cauchy_transform(mu, z) * z - 1.0) < 1e-5);
    CHECK(cauchy_transform(mu, cplx(0.3, 0.01)).imag() < 0.0);
  }
  CHECK_THROWS_AS(cauchy_transform(sc, cplx(0.5, 0.0)), DomainError);
  CHECK_THROWS_AS(cauchy_transform(sc, cplx(0.5, -1.0)), DomainError);
}

TEST_CASE("closed-form and grid Cauchy transforms agree") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> re(-4.0, 4.0), im(-6.0, 0.0);
  for (const SpectralMeasure& mu :
       {semicircle(1.0), semicircle(2.5), marchenko_pastur(0.5), marchenko_pastur(3.0),
        symmetrized_rect_gaussian(1.0), symmetrized_rect_gaussian(0.4), marchenko_pastur(2.0).scaled(1.7)}) {
    const CauchyEvaluator exact(mu, true), grid(mu, false);
    REQUIRE(exact.analytic());
    for (int i = 0; i < 40; ++i) {
      const cplx z(re(rng), std::pow(10.0, im(rng)));
      const auto [ga, da] = exact(z);
      const auto [gb, db] = grid(z);
      // Grid discretization error is largest right at square-root edges.
      CHECK(std::abs(ga - gb) < 2e-3);
      if (z.imag() > 0.05) {
        CHECK(std::abs(ga - gb) < 1e-5);
        CHECK(std::abs(da - db) < 1e-4);
      }
    }
  }
}

TEST_CASE("density recovery away from edges") {
  struct Case {
    SpectralMeasure mu;
    double lo, hi;
  };
  const double mlo = std::pow(1 - std::sqrt(0.5), 2), mhi = std::pow(1 + std::sqrt(0.5), 2);
  const double rb = (1 + std::sqrt(0.25)) / std::sqrt(std::sqrt(0.25)), ra = (1 - std::sqrt(0.25)) / std::sqrt(std::sqrt(0.25));
  const Case cases[] = {{semicircle(1.0), -1.9, 1.9},
                        {marchenko_pastur(2.0), mlo + 0.05, mhi - 0.05},
                        {symmetrized_rect_gaussian(0.25), ra + 0.05, rb - 0.05}};
  for (const Case& c : cases) {
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double x = c.lo + (c.hi - c.lo) * i / 200.0;
      worst = std::max(worst, std::abs(stieltjes_density(c.mu, x) - c.mu.density_at(x)));
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("log energy") {
  const double oracle = oracle::semicircle_log_energy(1.0);
  CHECK(std::abs(oracle + 0.25) < 1e-7);
  CHECK(std::abs(log_energy(semicircle(1.0)) - oracle) < 1e-4);
  CHECK(std::abs(log_energy(semicircle(2.0)) - (0.5 * std::log(2.0) - 0.25)) < 1e-4);
  const SpectralMeasure mp = marchenko_pastur(2.0);
  const double base = log_energy(mp);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 10; ++i) {
    const double s = std::exp(u(rng));
    CHECK(std::abs(log_energy(mp.scaled(s)) - (std::log(s) + base)) < 1e-6);
  }
  CHECK_THROWS_AS(log_energy(marchenko_pastur(0.5)), DivergenceError);
  CHECK_THROWS_AS(log_energy(SpectralMeasure::point_mass(1.0)), DivergenceError);
}

TEST_CASE("log abs moment") {
  const SpectralMeasure sc = semicircle(1.0);
  const double oracle = 2.0 * oracle::integrate_singular_ends(
                                  [](double x) { return oracle::semicircle_pdf(x, 1.0) * std::log(x); }, 0.0, 2.0, 400);
  CHECK(std::abs(oracle + 0.5) < 1e-7);
  CHECK(std::abs(log_abs_moment(sc) + 0.5) < 1e-4);
  CHECK(std::abs(log_abs_moment(bump(std::exp(1.0), 1e-3)) - 1.0) < 1e-6);
  // Symmetric measure: twice the positive half.
  const SpectralMeasure r = symmetrized_rect_gaussian(0.5);
  double half = 0.0;
  const auto& x = r.grid();
  const auto& f = r.density();
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    if (x[j] < 0) continue;
    half += oracle::integrate([&](double t) { return r.density_at(t) * std::log(t); }, x[j], x[j + 1], 1);
  }
  (void)f;
  CHECK(std::abs(log_abs_moment(r) - 2.0 * half) < 1e-8);
  CHECK_THROWS_AS(log_abs_moment(marchenko_pastur(0.5)), DivergenceError);
}

TEST_CASE("Wasserstein-2") {
  const SpectralMeasure sc = semicircle(1.0);
  CHECK(wasserstein2(sc, sc) == doctest::Approx(0.0));
  CHECK(wasserstein2(SpectralMeasure::point_mass(-0.5), SpectralMeasure::point_mass(1.25)) ==
        doctest::Approx(1.75).epsilon(1e-14));
  CHECK(std::abs(wasserstein2(sc, semicircle(1.21)) - 0.1) < 2e-3);
  // Atomic against continuous: equal-mass atoms at the quantile midpoints.
  std::vector<double> s;
  for (int i = 0; i < 1000; ++i) s.push_back(-1.0 + 2.0 * (i + 0.5) / 1000.0);
  std::vector<double> x(1001), f(1001, 0.5);
  for (int i = 0; i <= 1000; ++i) x[i] = -1.001 + 2.002 * i / 1000.0;
  f.front() = f.back() = 0.0;
  double tot = 0.0;
  for (double v : f) tot += v;
  for (double& v : f) v /= tot * (x[1] - x[0]);
  const double w = wasserstein2(SpectralMeasure::empirical(s), SpectralMeasure(x, f));
  CHECK(w < 2e-3);
}

TEST_CASE("empirical and smoothed measures") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<double> s(5000);
  for (double& v : s) v = n01(rng);
  const SpectralMeasure e = SpectralMeasure::empirical(s);
  CHECK(std::abs(e.total_mass() - 1.0) < 1e-12);
  const SpectralMeasure k = smoothed_empirical(s, 0.1);
  CHECK(std::abs(k.total_mass() - 1.0) < 1e-8);
  CHECK(std::abs(moment(k, 2) - moment(e, 2)) < 1e-4);
  CHECK(wasserstein2(e, k) < 0.05);
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(SpectralMeasure({0, 1, 2}, {0, 1, 0}, {{0.0, 0.5}}), InvalidParameter);  // mass 1.5
  CHECK_THROWS_AS(SpectralMeasure({0, 1, 2}, {0, -1, 0}), InvalidParameter);
  CHECK_THROWS_AS(SpectralMeasure({0, 1, 3}, {0, 0.5, 0}), InvalidParameter);
  CHECK_THROWS_AS(SpectralMeasure({0, 1, 2}, {0.5, 0.5, 0}), InvalidParameter);
  CHECK_NOTHROW(SpectralMeasure({0, 1, 2}, {0, 1, 0}));
  CHECK_NOTHROW(SpectralMeasure({0, 1, 2}, {0, 0.5, 0}, {{5.0, 0.5}}));
}

TEST_CASE("serialization round-trips bit-exactly") {
  for (const SpectralMeasure& mu : {marchenko_pastur(0.5), symmetrized_rect_gaussian(0.7),
                                    SpectralMeasure::point_mass(0.1)}) {
    std::stringstream ss;
    write_measure(ss, mu);
    const SpectralMeasure back = read_measure(ss);
    REQUIRE(back.grid().size() == mu.grid().size());
    REQUIRE(back.atoms().size() == mu.atoms().size());
    bool same = true;
    for (std::size_t i = 0; i < mu.grid().size(); ++i)
      same = same && std::bit_cast<std::uint64_t>(back.grid()[i]) == std::bit_cast<std::uint64_t>(mu.grid()[i]) &&
             std::bit_cast<std::uint64_t>(back.density()[i]) == std::bit_cast<std::uint64_t>(mu.density()[i]);
    for (std::size_t i = 0; i < mu.atoms().size(); ++i)
      same = same && back.atoms()[i].location == mu.atoms()[i].location && back.atoms()[i].mass == mu.atoms()[i].mass;
    CHECK(same);
    CHECK(back.fingerprint() == mu.fingerprint());
  }
  std::stringstream bad("# not a measure\n0 0\n");
  CHECK_THROWS_AS(read_measure(bad), InvalidParameter);
}
