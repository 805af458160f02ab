#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "sensing/errors.hpp"
#include "sensing/solver.hpp"

using namespace sensing;

namespace {

ChannelSpec linear(double delta) {
  ChannelSpec ch;
  ch.delta = delta;
  return ch;
}

void check_stationary(const SolveResult& r, double rho) {
  CHECK(r.converged);
  if (r.q_star > 0.0 && r.q_star < rho) {
    CHECK(r.inner_residual <= 1e-7);
    CHECK(r.outer_residual <= 1e-6 * (1.0 + r.r_star));
  }
  bool found = false;
  for (const auto& b : r.branches) found = found || b.q == r.q_star;
  CHECK(found);
  CHECK(r.mmse_tensor >= 0.0);
  CHECK(r.mmse_tensor <= rho * rho);
}

}  // namespace

TEST_CASE("replica potential at the origin") {
  const double expected = -0.5 - 0.5 * std::log(6.0 * std::numbers::pi);
  CHECK(std::abs(f_rs(goe_prior(), linear(1.0), 1.0, {0.0, 0.0}) - expected) < 1e-6);
  CHECK_THROWS_AS(f_rs(goe_prior(), linear(1.0), 1.0, {1.5, 0.0}), DomainError);
}

TEST_CASE("replica potential is stationary in q where the channel slope balances r") {
  // Psi'(0.5) = 1/2 for the linear channel with delta = 1, so r = 4 alpha Psi' = 2.
  const PriorSpec p = goe_prior();
  const ChannelSpec ch = linear(1.0);
  const double h = 1e-4;
  const double dq = (f_rs(p, ch, 1.0, {0.5 + h, 2.0}) - f_rs(p, ch, 1.0, {0.5 - h, 2.0})) / (2.0 * h);
  CHECK(std::abs(dq) < 1e-6);
}

TEST_CASE("inner minimization over r") {
  const PriorSpec p = goe_prior();
  const ChannelSpec ch = linear(1.0);
  // -1/(4(1 + r)) = -1/8 at q = 1/2.
  CHECK(std::abs(inf_r(p, ch, 1.0, 0.5).first - 1.0) < 1e-6);
  const auto [r0, v0] = inf_r(p, ch, 1.0, 0.0);
  CHECK(r0 == 0.0);
  CHECK(std::abs(v0 - f_rs(p, ch, 1.0, {0.0, 0.0})) < 1e-15);
  // At q = rho the potential is non-increasing in r, so the bracket end is the minimizer.
  const auto [r1, v1] = inf_r(p, ch, 1.0, 1.0);
  CHECK(std::abs(r1 - 4.0 * psi_out_prime(ch, 1.0, 1.0)) < 1e-12);
  CHECK(std::abs(v1 - (oracle::psi_goe(r1) + psi_out(ch, 1.0, 1.0) + 0.25)) < 1e-4);
}

TEST_CASE("GOE prior with a linear channel matches the quadratic oracle") {
  const auto r = solve(goe_prior(), linear(1.0), 1.0);
  const double qs = (7.0 - std::sqrt(17.0)) / 4.0;
  CHECK(std::abs(r.q_star - qs) < 1e-4);
  CHECK(std::abs(r.mmse_tensor - (1.0 - qs * qs)) < 2e-4);
  CHECK(std::abs(r.mmse_tensor - 0.48272) < 1e-4);
  CHECK(!r.mmse_psd.has_value());
  CHECK(!r.degenerate);
  check_stationary(r, 1.0);
  // The reported value is the potential at the reported state.
  CHECK(std::abs(r.f_limit - f_rs(goe_prior(), linear(1.0), 1.0, {r.q_star, r.r_star})) < 1e-12);
  CHECK(std::abs(r.mutual_info - (-r.f_limit + psi_out(linear(1.0), 1.0, 1.0))) < 1e-12);
  for (double alpha : {0.1, 3.0})
    for (double delta : {0.5, 2.0}) {
      const auto s = solve(goe_prior(), linear(delta), alpha);
      CHECK(std::abs(s.q_star - oracle::goe_linear_overlap(alpha, delta)) < 1e-4);
      check_stationary(s, 1.0);
    }
}

TEST_CASE("vanishing sample ratio returns the prior-mean overlap") {
  CHECK(std::abs(solve(goe_prior(), linear(1.0), 1e-8).q_star) < 1e-3);
  const auto w = solve(wishart_prior(2.0), linear(1.0), 1e-8);
  CHECK(std::abs(w.q_star - 1.0) < 1e-3);
  REQUIRE(w.mmse_psd.has_value());
  CHECK(std::abs(*w.mmse_psd - 0.5) < 1e-3);
}

TEST_CASE("near-noiseless channel with many samples") {
  const auto r = solve(goe_prior(), linear(1e-4), 50.0);
  CHECK(r.q_star >= 0.999);
  CHECK(r.mmse_tensor <= 2e-3);
  CHECK(std::abs(r.q_star - oracle::goe_linear_overlap(50.0, 1e-4)) < 1e-4);
}

TEST_CASE("doubling the grid leaves the limit unchanged") {
  SolverOptions coarse, fine;
  coarse.grid_size = 129;
  fine.grid_size = 257;
  const ChannelSpec ch = linear(0.5);
  const auto a = solve(wishart_prior(2.0), ch, 0.7, coarse), b = solve(wishart_prior(2.0), ch, 0.7, fine);
  CHECK(std::abs(a.f_limit - b.f_limit) < 1e-8);
  check_stationary(b, 1.5);
}

TEST_CASE("nonlinear channel solves to a stationary point") {
  ChannelSpec ch;
  ch.activation = Activation::Custom;
  ch.custom = tanh_activation();
  ch.delta = 0.1;
  const auto r = solve(goe_prior(), ch, 2.0);
  check_stationary(r, 1.0);
  CHECK(r.q_star > 0.0);
  CHECK(r.q_star < 1.0);
}

TEST_CASE("rectangular Gaussian prior with a linear channel matches the quadratic oracle") {
  const PriorSpec p = rect_gaussian_prior(1.0);
  const auto r = solve_rec(p, linear(1.0), 1.0, 1.0);
  CHECK(std::abs(r.q_star - (3.0 - std::sqrt(5.0)) / 2.0) < 1e-4);
  check_stationary(r, 1.0);
  CHECK(std::abs(r.f_limit - f_rs_rec(p, linear(1.0), 1.0, {r.q_star, r.r_star})) < 1e-12);
  for (double alpha : {0.2, 5.0}) CHECK(std::abs(solve_rec(p, linear(0.5), alpha, 1.0).q_star - oracle::rect_linear_overlap(alpha, 0.5)) < 1e-4);
  CHECK(std::abs(solve_rec(p, linear(1.0), 1e-8, 1.0).q_star) < 1e-3);
  const auto noisy = solve_rec(p, linear(1e4), 1.0, 1.0);
  CHECK(std::abs(noisy.q_star) < 1e-3);
  CHECK(std::abs(noisy.mmse_tensor - 1.0) < 1e-3);
  CHECK_THROWS_AS(solve_rec(goe_prior(), linear(1.0), 1.0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(solve(p, linear(1.0), 1.0), InvalidParameter);
}

TEST_CASE("rectangular solve below beta = 1") {
  const PriorSpec p = rect_gaussian_prior(0.5);
  const auto r = solve_rec(p, linear(1.0), 1.0, 0.5);
  check_stationary(r, 1.0);
  const auto lo = solve_rec(p, linear(1.0), 0.5, 0.5);
  CHECK(lo.mmse_tensor >= r.mmse_tensor - 1e-8);
}

TEST_CASE("sweeps") {
  const PriorSpec p = goe_prior();
  const ChannelSpec ch = linear(1.0);
  CHECK(sweep(p, ch, {}, Model::Symmetric).empty());
  const auto one = sweep(p, ch, {1.0}, Model::Symmetric);
  REQUIRE(one[0].result.has_value());
  const auto direct = solve(p, ch, 1.0);
  CHECK(one[0].result->q_star == direct.q_star);
  CHECK(one[0].result->f_limit == direct.f_limit);
  std::vector<double> alphas;
  for (int i = 0; i < 9; ++i) alphas.push_back(std::pow(10.0, -2.0 + 0.5 * i));
  const auto curve = sweep(p, ch, alphas, Model::Symmetric, {}, 2);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    REQUIRE(curve[i].result.has_value());
    CHECK(std::abs(curve[i].result->q_star - oracle::goe_linear_overlap(alphas[i], 1.0)) < 1e-4);
    if (i > 0) {
      CHECK(curve[i].result->q_star >= curve[i - 1].result->q_star - 1e-8);
      CHECK(curve[i].result->mmse_tensor <= curve[i - 1].result->mmse_tensor + 1e-8);
    }
  }
  const auto bad = sweep(p, ch, {-1.0, 1.0}, Model::Symmetric);
  CHECK(!bad[0].result.has_value());
  CHECK(!bad[0].error.empty());
  CHECK(bad[1].result.has_value());
}

TEST_CASE("spiked tensor potential") {
  const PriorSpec p = goe_prior();
  for (double lambda : {0.0, 1.0, 5.0})
    for (int order : {2, 3}) CHECK(std::abs(f_rs_spike(p, 0.0, lambda, order)) < 1e-3);
  for (double q : {0.0, 0.3, 1.0}) CHECK(std::abs(f_rs_spike(p, q, 0.0, 2)) < 1e-3);
  const double expected = 0.75 - 0.25 * std::log(5.0) - 0.25;
  CHECK(std::abs(f_rs_spike(p, 1.0, 1.0, 2) - expected) < 1e-4);
  CHECK(std::abs(expected - 0.09764) < 1e-5);
  CHECK_THROWS_AS(f_rs_spike(p, 0.5, 1.0, 1), InvalidParameter);
}

TEST_CASE("spiked tensor extremizer") {
  const PriorSpec p = goe_prior();
  const auto flat = solve_spike(p, 0.0, 2, 65);
  CHECK(flat.q_star == 0.0);
  CHECK(std::abs(flat.f_limit) < 1e-12);
  CHECK(std::abs(solve_spike(p, 1e4, 2, 65).q_star - 1.0) < 1e-3);
  // GOE, p = 2: f' = lambda (1 - q - 1 / (1 + 4 lambda q)), maximized at max(0, 1 - 1/(4 lambda)).
  double prev = 0.0;
  for (double lambda : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    const auto s = solve_spike(p, lambda, 2, 65);
    CHECK(std::abs(s.q_star - std::max(0.0, 1.0 - 0.25 / lambda)) < 1e-4);
    CHECK(s.q_star >= prev - 1e-8);
    prev = s.q_star;
  }
}
