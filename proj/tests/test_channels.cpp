#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sensing/channels.hpp"
#include "sensing/errors.hpp"

using namespace sensing;

namespace {

ChannelSpec linear(double delta) {
  ChannelSpec ch;
  ch.delta = delta;
  return ch;
}

ChannelSpec make(Activation act, ChannelRandomness rnd, double delta = 1.0) {
  ChannelSpec ch;
  ch.activation = act;
  ch.randomness = rnd;
  ch.delta = delta;
  if (act == Activation::Custom) ch.custom = tanh_activation();
  return ch;
}

// Non-decreasing and convex on a 64-point grid, by finite differences.
void check_convex_increasing(const ChannelSpec& ch, double rho, bool rectangular) {
  const int n = 64;
  std::vector<double> q(n), v(n);
  for (int i = 0; i < n; ++i) {
    q[i] = rho * i / (n - 1);
    v[i] = rectangular ? psi_out_rec(ch, q[i], rho) : psi_out(ch, q[i], rho);
  }
  const double h = q[1] - q[0];
  for (int i = 1; i < n; ++i) CHECK((v[i] - v[i - 1]) / h >= -1e-6);
  for (int i = 1; i + 1 < n; ++i) CHECK((v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h) >= -1e-6);
}

}  // namespace

TEST_CASE("output density") {
  CHECK(pout_density(linear(1.0), 0.3, 0.3) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
  const ChannelSpec sq = make(Activation::Square, ChannelRandomness::None, 0.5);
  CHECK(pout_density(sq, 4.0, 2.0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
  for (const auto& ch : {linear(0.3), sq, make(Activation::Custom, ChannelRandomness::NormalMultiplier, 0.2)}) {
    const double mass = oracle::integrate([&](double y) { return pout_density(ch, y, 0.7); }, -30.0, 30.0, 400);
    CHECK(std::abs(mass - 1.0) < 1e-6);
  }
  // The multiplier makes the output centred with variance delta + phi(z)^2.
  const ChannelSpec mult = make(Activation::Linear, ChannelRandomness::NormalMultiplier, 1.0);
  CHECK(pout_density(mult, 0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK_THROWS_AS(pout_density(linear(0.0), 0.0, 0.0), DegenerateChannel);
}

TEST_CASE("linear channel potential matches the closed form") {
  const ChannelSpec ch = linear(1.0);
  CHECK(std::abs(psi_out(ch, 1.0, 1.0) - (-0.5 - 0.5 * std::log(2.0 * std::numbers::pi))) < 1e-6);
  CHECK(std::abs(psi_out(ch, 0.0, 1.0) - (-0.5 - 0.5 * std::log(6.0 * std::numbers::pi))) < 1e-6);
  CHECK(std::abs(psi_out_prime(ch, 0.0, 1.0) - 1.0 / 3.0) < 1e-4);
  CHECK(std::abs(psi_out_prime(ch, 0.5, 1.0) - 0.5) < 1e-4);
  for (double q : {0.0, 0.3, 0.9}) CHECK(psi_out_prime(linear(100.0), q, 1.0) <= 0.01);
  for (double delta : {0.1, 1.0, 10.0})
    for (int i = 0; i < 64; ++i) {
      const double q = i / 63.0;
      CHECK(std::abs(psi_out(linear(delta), q, 1.0) - oracle::psi_out_linear(q, 1.0, delta)) < 1e-6);
    }
  // Larger rho and small noise use the dense inner rule.
  for (double q : {0.0, 1.0, 2.5}) CHECK(std::abs(psi_out(linear(0.05), q, 3.0) - oracle::psi_out_linear(q, 3.0, 0.05)) < 1e-6);
}

TEST_CASE("rectangular normalization") {
  const ChannelSpec ch = linear(1.0);
  CHECK(std::abs(psi_out_rec(ch, 1.0, 1.0) - (-0.5 - 0.5 * std::log(2.0 * std::numbers::pi))) < 1e-6);
  CHECK(std::abs(psi_out_rec(ch, 0.0, 1.0) - (-0.5 - 0.5 * std::log(4.0 * std::numbers::pi))) < 1e-6);
  CHECK(std::abs(psi_out_rec_prime(ch, 0.0, 1.0) - 0.25) < 1e-4);
  for (int i = 0; i < 16; ++i) {
    const double q = i / 15.0;
    CHECK(std::abs(psi_out_rec(ch, q, 1.0) - oracle::psi_out_linear_rec(q, 1.0, 1.0)) < 1e-6);
  }
}

TEST_CASE("channel potential is deterministic") {
  const ChannelSpec ch = make(Activation::Custom, ChannelRandomness::None, 0.5);
  QuadratureSpec a, b;
  const double x = psi_out(ch, 0.4, 1.0, a);
  const double y = ChannelPotential::get(ch, 1.0, b, false)->value(0.4);
  CHECK(std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y));
}

TEST_CASE("channel potentials are non-decreasing and convex") {
  check_convex_increasing(linear(0.5), 1.0, false);
  check_convex_increasing(linear(0.5), 1.0, true);
  check_convex_increasing(make(Activation::Square, ChannelRandomness::None), 1.0, false);
  check_convex_increasing(make(Activation::Custom, ChannelRandomness::None, 0.1), 1.0, false);
  check_convex_increasing(make(Activation::Custom, ChannelRandomness::NormalMultiplier), 1.5, false);
  check_convex_increasing(make(Activation::Linear, ChannelRandomness::NormalMultiplier), 1.0, true);
}

TEST_CASE("derivative agrees with a direct difference quotient") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (const auto& ch : {linear(0.7), make(Activation::Custom, ChannelRandomness::None, 0.3)}) {
    for (int i = 0; i < 10; ++i) {
      const double q = u(gen);
      auto central = [&](double h) { return (psi_out(ch, q + h, 1.0) - psi_out(ch, q - h, 1.0)) / (2.0 * h); };
      // Richardson-extrapolated difference quotient, error O(h^4).
      const double fd = (4.0 * central(5e-4) - central(1e-3)) / 3.0;
      CHECK(std::abs(psi_out_prime(ch, q, 1.0) - fd) < 1e-5);
    }
  }
}

TEST_CASE("quadrature converges for bounded activations") {
  QuadratureSpec base, doubled;
  doubled.hermite_order = 2 * base.hermite_order;
  for (double delta : {0.1, 0.5, 2.0}) {
    const ChannelSpec ch = make(Activation::Custom, ChannelRandomness::None, delta);
    for (double q : {0.0, 0.5, 0.9}) CHECK(std::abs(psi_out(ch, q, 1.0, base) - psi_out(ch, q, 1.0, doubled)) < 1e-7);
  }
  // A normal multiplier makes a phi(z) unbounded and puts branch points of
  // sqrt(delta + phi^2) near the real axis, so convergence is slower.
  const ChannelSpec mult = make(Activation::Custom, ChannelRandomness::NormalMultiplier, 0.5);
  for (double q : {0.0, 0.5, 0.9}) CHECK(std::abs(psi_out(mult, q, 1.0, base) - psi_out(mult, q, 1.0, doubled)) < 1e-6);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(psi_out(linear(1.0), 1.5, 1.0), DomainError);
  CHECK_THROWS_AS(psi_out(linear(1.0), -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(psi_out(linear(0.0), 0.5, 1.0), DegenerateChannel);
  QuadratureSpec tiny;
  tiny.hermite_order = 4;
  CHECK_THROWS_AS(psi_out(linear(1.0), 0.5, 1.0, tiny), InvalidParameter);
  CHECK_THROWS_AS(TabulatedActivation([](double z) { return 2.0 * std::tanh(z); }, -4, 4, 1.0, 5.0), InvalidParameter);
  CHECK_THROWS_AS(TabulatedActivation([](double z) { return std::tanh(3.0 * z); }, -4, 4, 1.0, 1.0), InvalidParameter);
  const TabulatedActivation t([](double z) { return std::sin(z); }, -3, 3, 1.0, 1.0);
  CHECK(std::abs(t(0.3) - std::sin(0.3)) < 1e-5);
  CHECK(t(10.0) == doctest::Approx(std::sin(3.0)));
}
