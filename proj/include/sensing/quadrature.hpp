#pragma once

#include <vector>

namespace sensing {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1]. Rules are cached and shared.
const QuadratureRule& gauss_legendre(int n);

// Gauss-Hermite rule for the standard normal weight, weights sum to 1.
const QuadratureRule& gauss_hermite_normal(int n);

// n equally spaced nodes on [-half_width, half_width] with weights proportional to
// the standard normal density, normalized to sum 1. For integrands analytic in a
// strip of width d the error decays like exp(-2 pi d / h), which beats
// Gauss-Hermite when the integrand has singularities near the real axis.
QuadratureRule gaussian_trapezoid(int n, double half_width);

}  // namespace sensing
