#include "sensing/freeconv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "sensing/errors.hpp"

namespace sensing {
namespace {

constexpr double kEtas[3] = {1e-6, 1e-5, 1e-4};
constexpr int kIterationCap = 10000;
constexpr double kTolerance = 1e-13;
constexpr double kRoundingFloor = 1e-11;

struct Stats {
  long iterations = 0;
  double residual = 0.0;
};

// Weights of the quadratic through (eta_k, p_k) evaluated at eta = 0.
std::array<double, 3> richardson_weights() {
  std::array<double, 3> w{};
  for (int i = 0; i < 3; ++i) {
    double v = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) v *= kEtas[j] / (kEtas[j] - kEtas[i]);
    w[i] = v;
  }
  return w;
}

// Smallest interval carrying the measure.
std::pair<double, double> support_extent(const SpectralMeasure& mu) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const auto [first, last] = mu.active_range();
  if (last >= first) {
    const auto& x = mu.grid();
    lo = x[std::max(first - 1, 0)];
    hi = x[std::min<int>(last + 1, int(x.size()) - 1)];
  }
  for (const Atom& a : mu.atoms()) {
    lo = std::min(lo, a.location);
    hi = std::max(hi, a.location);
  }
  return {lo, hi};
}

// g0 on the real axis outside the support.
double real_cauchy(const CauchyEvaluator& g0, double w) { return g0(cplx(w, 1e-300)).first.real(); }

// Minimum of a unimodal function on (a, b); only the value is needed.
template <class F>
double golden_min(F f, double a, double b) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

// Outer edges of mu0 boxplus sc(t): extrema of x(w) = w + t g0(w) over real w
// outside the support, located within sqrt(t) of it.
std::pair<double, double> semicircle_edges(const CauchyEvaluator& g0, double lo, double hi, double t) {
  const double s = std::sqrt(t), eps = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  const double right = golden_min([&](double w) { return w + t * real_cauchy(g0, w); }, hi + eps, hi + s);
  const double left = -golden_min([&](double w) { return -(w + t * real_cauchy(g0, w)); }, lo - s, lo - eps);
  return {left, right};
}

// Right edge of the rectangular law: minimum over real w > hi of
// x(w)^2 = w^2 D^2 + c D, D = 1 + t sqrt(beta) g0(w)/w, c = t (1 - beta)/sqrt(beta).
double rect_edge(const CauchyEvaluator& g0, double hi, double t, double beta, double bound) {
  const double sb = std::sqrt(beta), c = t * (1.0 - beta) / sb;
  const double eps = 1e-12 * std::max(1.0, hi);
  return golden_min(
      [&](double w) {
        const double D = 1.0 + t * sb * real_cauchy(g0, w) / w;
        return std::sqrt(w * w * D * D + c * D);
      },
      std::max(hi, 0.0) + eps, bound);
}

std::vector<double> centred_grid(double lo, double hi, int n) {
  const double c = 0.5 * (lo + hi), half = 0.5 * (hi - lo) * kGridSpan;
  std::vector<double> x(n);
  const double step = 2.0 * half / double(n - 1);
  for (int i = 0; i < n; ++i) x[i] = c - half + double(i) * step;
  x.back() = c + half;
  return x;
}

SpectralMeasure finish_density(std::vector<double> x, std::vector<double> p) {
  for (double& v : p) v = std::max(v, 0.0);
  p.front() = 0.0;
  p.back() = 0.0;
  const double h = (x.back() - x.front()) / double(x.size() - 1);
  double s = 0.0;
  for (double v : p) s += v;
  if (!(s > 0.0)) throw NumericError("free convolution produced an empty density");
  for (double& v : p) v /= s * h;
  return SpectralMeasure(std::move(x), std::move(p));
}

// Newton on F(w) = w + t g0(w) - z with a damped fixed-point fallback.
cplx solve_scalar(const CauchyEvaluator& g0, double t, cplx z, cplx w, Stats& st) {
  if (!(w.imag() >= z.imag())) w = cplx(w.real(), z.imag());
  const double scale = std::max(1.0, std::abs(z));
  auto [g, dg] = g0(w);
  cplx F = w + t * g - z;
  for (int it = 0;; ++it) {
    const double res = std::abs(F);
    if (res <= kTolerance * scale) break;
    if (it == kIterationCap) throw ConvergenceError("subordination fixed point did not converge", res / scale);
    ++st.iterations;
    const cplx J = 1.0 + t * dg;
    bool accepted = false;
    if (std::abs(J) > 0.0) {
      const cplx c = w - F / J;
      if (c.imag() > 0.0 && std::isfinite(c.real()) && std::isfinite(c.imag())) {
        const auto [gc, dgc] = g0(c);
        const cplx Fc = c + t * gc - z;
        if (std::abs(Fc) < res) {
          w = c;
          g = gc;
          dg = dgc;
          F = Fc;
          accepted = true;
        } else if (res <= kRoundingFloor * scale) {
          break;  // Newton stalled at rounding level
        }
      }
    }
    if (!accepted) {
      w = 0.5 * w + 0.5 * (z - t * g);
      std::tie(g, dg) = g0(w);
      F = w + t * g - z;
    }
  }
  st.residual = std::max(st.residual, std::abs(F) / scale);
  return w;
}

struct RectState {
  cplx a, b;
};

// Hermitized equations in (a, b), with h0(zeta) = g0(w)/w, w = sqrt(a) sqrt(b):
//   a = z - (t/sqrt(beta)) (beta a h0 + (1 - beta)/b),   b = z - t sqrt(beta) b h0.
struct RectSystem {
  const CauchyEvaluator& g0;
  double t, beta, sb;

  // Residuals are scaled by the size of the terms they balance.
  void eval(const RectState& s, cplx z, cplx& F1, cplx& F2, cplx J[4], double scale[2]) const {
    const cplx w = std::sqrt(s.a) * std::sqrt(s.b);
    const auto [g, dg] = g0(w);
    const cplx h = g / w;
    const cplx dh = (dg * w - g) / (2.0 * w * w * w);
    const cplx ab = s.a * s.b;
    const cplx u1 = (t / sb) * (beta * s.a * h + (1.0 - beta) / s.b), u2 = t * sb * s.b * h;
    F1 = s.a - z + u1;
    F2 = s.b - z + u2;
    scale[0] = std::max({1.0, std::abs(s.a), std::abs(z), std::abs(u1)});
    scale[1] = std::max({1.0, std::abs(s.b), std::abs(z), std::abs(u2)});
    const cplx diag = 1.0 + t * sb * (h + ab * dh);
    J[0] = diag;
    J[1] = (t / sb) * (beta * s.a * s.a * dh - (1.0 - beta) / (s.b * s.b));
    J[2] = t * sb * s.b * s.b * dh;
    J[3] = diag;
  }

  // Right-hand sides of the fixed-point form.
  RectState map(const RectState& s, cplx z) const {
    const cplx w = std::sqrt(s.a) * std::sqrt(s.b);
    const cplx h = g0(w).first / w;
    return {z - (t / sb) * (beta * s.a * h + (1.0 - beta) / s.b), z - t * sb * s.b * h};
  }
};

RectState solve_rect(const RectSystem& sys, cplx z, RectState s, Stats& st) {
  if (!(s.a.imag() >= z.imag())) s.a = cplx(s.a.real(), z.imag());
  if (!(s.b.imag() >= z.imag())) s.b = cplx(s.b.real(), z.imag());
  cplx F1, F2, J[4];
  double sc[2];
  sys.eval(s, z, F1, F2, J, sc);
  auto norm = [](cplx f1, cplx f2, const double* w) { return std::max(std::abs(f1) / w[0], std::abs(f2) / w[1]); };
  double res = norm(F1, F2, sc);
  for (int it = 0;; ++it) {
    if (res <= kTolerance) break;
    if (it == kIterationCap) throw ConvergenceError("rectangular subordination did not converge", res);
    ++st.iterations;
    bool accepted = false;
    const cplx det = J[0] * J[3] - J[1] * J[2];
    if (std::abs(det) > 0.0) {
      const RectState c{s.a - (J[3] * F1 - J[1] * F2) / det, s.b - (J[0] * F2 - J[2] * F1) / det};
      if (c.a.imag() > 0.0 && c.b.imag() > 0.0 && std::isfinite(std::abs(c.a)) && std::isfinite(std::abs(c.b))) {
        cplx G1, G2, K[4];
        double sk[2];
        sys.eval(c, z, G1, G2, K, sk);
        const double rc = norm(G1, G2, sk);
        if (rc < res) {
          s = c;
          F1 = G1;
          F2 = G2;
          std::copy(K, K + 4, J);
          res = rc;
          accepted = true;
        } else if (res <= kRoundingFloor) {
          break;
        }
      }
    }
    if (!accepted) {
      const RectState m = sys.map(s, z);
      s = {0.5 * (s.a + m.a), 0.5 * (s.b + m.b)};
      sys.eval(s, z, F1, F2, J, sc);
      res = norm(F1, F2, sc);
    }
  }
  st.residual = std::max(st.residual, res);
  return s;
}

// Continuation from high above the axis, where a = b = z is close to the
// physical solution, down to Im z. Used when the warm start has followed a
// branch that folds away.
RectState solve_rect_from_above(const RectSystem& sys, cplx z, double top, Stats& st) {
  double eta = std::max(top, 4.0 * z.imag());
  RectState s{cplx(z.real(), eta), cplx(z.real(), eta)};
  for (;;) {
    s = solve_rect(sys, cplx(z.real(), eta), s, st);
    if (eta <= z.imag()) return s;
    const double next = std::max(0.7 * eta, z.imag());
    s.a -= cplx(0.0, eta - next);
    s.b -= cplx(0.0, eta - next);
    eta = next;
  }
}

}  // namespace

ConvolutionResult semicircle_convolve(const SpectralMeasure& mu0, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("noise scale t must be nonnegative");
  if (t == 0.0) return {mu0, 0.0, 0, 0.0};
  const CauchyEvaluator g0(mu0);
  // The support of mu_t lies within the support of mu0 widened by 2 sqrt(t).
  // The grid follows this bound, which moves smoothly with t.
  // The grid is pinned to the exact outer edges so that the discretization
  // error varies smoothly with t.
  const auto [lo, hi] = support_extent(mu0);
  const auto [left, right] = semicircle_edges(g0, lo, hi, t);
  std::vector<double> x = centred_grid(left, right, kDefaultGridPoints);
  const int n = int(x.size());
  std::vector<double> p(n, 0.0);
  const auto rw = richardson_weights();
  Stats st;
  cplx warm(x[0], 0.0);
  warm -= t / warm;
  for (int i = 1; i + 1 < n; ++i) {
    cplx w = warm;
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
      const cplx z(x[i], kEtas[k]);
      if (k > 0) w += cplx(0.0, kEtas[k] - kEtas[k - 1]);
      w = solve_scalar(g0, t, z, w, st);
      if (k == 0) warm = w;
      // g_t(z) = (z - w)/t, so the density is (Im w - eta)/(pi t).
      acc += rw[k] * (w.imag() - kEtas[k]) / (std::numbers::pi * t);
    }
    p[i] = acc;
  }
  return {finish_density(std::move(x), std::move(p)), t, st.iterations, st.residual};
}

ConvolutionResult rect_convolve(const SpectralMeasure& mu0_sym, double t, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in (0, 1]");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("noise scale t must be nonnegative");
  if (!mu0_sym.is_symmetric(1e-8)) throw InvalidParameter("rectangular convolution needs a symmetric measure");
  if (t == 0.0) return {mu0_sym, 0.0, 0, 0.0};
  const CauchyEvaluator g0(mu0_sym);
  const double sb = std::sqrt(beta);
  // Largest singular value of S + sqrt(t) Z is at most |S| + sqrt(t)(1 + sqrt(beta))/beta^(1/4);
  // the exact edge is located below that bound.
  const auto [lo, hi] = support_extent(mu0_sym);
  const double top = std::max(std::abs(lo), std::abs(hi));
  const double bound = top + std::sqrt(t) * (1.0 + sb) / std::sqrt(sb);
  const double edge = rect_edge(g0, top, t, beta, bound);
  std::vector<double> x = centred_grid(-edge, edge, kDefaultGridPoints);
  const int n = int(x.size());
  for (int i = 0; i < n / 2; ++i) x[n - 1 - i] = -x[i];
  std::vector<double> p(n, 0.0);
  const auto rw = richardson_weights();
  const RectSystem sys{g0, t, beta, sb};
  Stats st;
  RectState warm{cplx(x[n - 1], 0.0), cplx(x[n - 1], 0.0)};
  // Sweep inwards from the right end, then mirror.
  for (int i = n - 2; i >= n / 2; --i) {
    RectState s = warm;
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
      const cplx z(x[i], kEtas[k]);
      if (k > 0) {
        s.a += cplx(0.0, kEtas[k] - kEtas[k - 1]);
        s.b += cplx(0.0, kEtas[k] - kEtas[k - 1]);
      }
      try {
        s = solve_rect(sys, z, s, st);
      } catch (const ConvergenceError&) {
        s = solve_rect_from_above(sys, z, edge, st);
      }
      if (k == 0) warm = s;
      // g = (z - b)/(t sqrt(beta))
      acc += rw[k] * (s.b.imag() - kEtas[k]) / (std::numbers::pi * t * sb);
    }
    p[i] = acc;
    p[n - 1 - i] = acc;
  }
  return {finish_density(std::move(x), std::move(p)), t, st.iterations, st.residual};
}

}  // namespace sensing
