#pragma once

// Reference computations that share no code with the library.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Composite Gauss-Legendre (10-point) on [a, b] with n panels.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 200) {
  static const double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                              0.8650633666889845, 0.9739065285171717};
  static const double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                              0.1494513491505806, 0.0666713443086881};
  double s = 0.0;
  const double step = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * step, half = 0.5 * step;
    for (int i = 0; i < 5; ++i) s += w[i] * half * (f(mid - half * x[i]) + f(mid + half * x[i]));
  }
  return s;
}

// int_a^b f, where f may have an integrable singularity at an endpoint:
// substitution x = a + (b - a) t^2 near a and symmetric near b.
inline double integrate_singular_ends(const std::function<double(double)>& f, double a, double b,
                                      int panels = 200) {
  const double m = 0.5 * (a + b), L = m - a;
  auto left = [&](double t) { return f(a + L * t * t) * 2.0 * L * t; };
  auto right = [&](double t) { return f(b - L * t * t) * 2.0 * L * t; };
  return integrate(left, 0.0, 1.0, panels) + integrate(right, 0.0, 1.0, panels);
}

inline double semicircle_pdf(double x, double v) {
  const double r = 4.0 * v - x * x;
  return r > 0 ? std::sqrt(r) / (2.0 * std::numbers::pi * v) : 0.0;
}

// Brute-force double integral of log|x - y| against the semicircle.
inline double semicircle_log_energy(double v) {
  const double e = 2.0 * std::sqrt(v);
  auto potential = [&](double x) {
    auto inner = [&](double y) { return semicircle_pdf(y, v) * std::log(std::abs(x - y)); };
    return integrate_singular_ends(inner, -e, x, 40) + integrate_singular_ends(inner, x, e, 40);
  };
  return integrate_singular_ends([&](double x) { return semicircle_pdf(x, v) * potential(x); }, -e, e, 40);
}

// Gaussian denoising potentials in closed form.
inline double psi_goe(double r) { return -0.25 * std::log1p(r) - 0.25; }
inline double psi_goe_prime(double r) { return -0.25 / (1.0 + r); }
inline double psi_rec_gauss(double r) { return -0.5 * std::log1p(r); }
inline double psi_rec_gauss_prime(double r) { return -0.5 / (1.0 + r); }

inline double psi_out_linear(double q, double rho, double delta) {
  return -0.5 - 0.5 * std::log(2.0 * std::numbers::pi * (delta + 2.0 * (rho - q)));
}
inline double psi_out_linear_rec(double q, double rho, double delta) {
  return -0.5 - 0.5 * std::log(2.0 * std::numbers::pi * (delta + (rho - q)));
}

// Overlap of the GOE prior with a linear channel: 2q^2 - (4a + D + 2) q + 4a = 0.
inline double goe_linear_overlap(double alpha, double delta) {
  const double b = 4.0 * alpha + delta + 2.0;
  return (b - std::sqrt(b * b - 32.0 * alpha)) / 4.0;
}
// Rectangular Gaussian prior with a linear channel: q^2 - (a + D + 1) q + a = 0.
inline double rect_linear_overlap(double alpha, double delta) {
  const double b = alpha + delta + 1.0;
  return (b - std::sqrt(b * b - 4.0 * alpha)) / 2.0;
}

}  // namespace oracle
