#include "sensing/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "sensing/errors.hpp"

namespace sensing {
namespace {

QuadratureRule build_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// Orthonormal probabilists' Hermite polynomials at x, rescaled to stay finite.
// Returns p_n / p_{n-1} and log of 1 / sum_{k<n} p_k^2 (the Christoffel weight).
std::pair<double, double> hermite_ratio_and_logweight(int n, double x) {
  constexpr double kBig = 1e150, kShrink = 1e-150;
  double pm = 0.0, p = 1.0, sum = 0.0, log_scale = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += p * p;
    const double next = (x * p - std::sqrt(double(k)) * pm) / std::sqrt(k + 1.0);
    pm = p;
    p = next;
    if (std::abs(p) > kBig) {
      p *= kShrink;
      pm *= kShrink;
      sum *= kShrink * kShrink;
      log_scale += 2.0 * std::log(kBig);
    }
  }
  return {p / pm, -std::log(sum) - log_scale};
}

// Golub-Welsch eigenvalues for starting nodes, Newton polish, Christoffel weights.
QuadratureRule build_hermite(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = eig.eigenvalues()[i];
    for (int it = 0; it < 8; ++it) {
      // p_n' = sqrt(n) p_{n-1}
      const double dx = hermite_ratio_and_logweight(n, x).first / std::sqrt(double(n));
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    rule.nodes[i] = x;
  }
  // Exact symmetry.
  for (int i = 0, j = n - 1; i <= j; ++i, --j) {
    const double m = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -m;
    rule.nodes[j] = m;
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    rule.weights[i] = std::exp(hermite_ratio_and_logweight(n, rule.nodes[i]).second);
    total += rule.weights[i];
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

template <QuadratureRule (*Build)(int)>
const QuadratureRule& cached(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  if (n < 1) throw InvalidParameter("quadrature order must be positive");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(Build(n));
  return *slot;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) { return cached<build_legendre>(n); }
const QuadratureRule& gauss_hermite_normal(int n) { return cached<build_hermite>(n); }

QuadratureRule gaussian_trapezoid(int n, double half_width) {
  if (n < 2 || !(half_width > 0.0)) throw InvalidParameter("trapezoid rule needs n >= 2 and a positive width");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double h = 2.0 * half_width / (n - 1);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    // Built from both ends so the rule is exactly symmetric.
    const double x = i < n / 2 ? -half_width + i * h : half_width - (n - 1 - i) * h;
    rule.nodes[i] = (2 * i + 1 == n) ? 0.0 : x;
    rule.weights[i] = std::exp(-0.5 * rule.nodes[i] * rule.nodes[i]);
  }
  for (int i = 0, j = n - 1; i < j; ++i, --j) total += rule.weights[i] + rule.weights[j];
  if (n % 2) total += rule.weights[n / 2];
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace sensing
