#include <cmath>
#include <numbers>
#include <tuple>

#include "sensing/errors.hpp"
#include "sensing/kernels.hpp"
#include "sensing/measures.hpp"

namespace sensing {
namespace {

constexpr int kNear = 16;

// Semicircle of variance v: g = (z - s)/(2v) = 2/(z + s), s = sqrt(z - 2 sqrt v) sqrt(z + 2 sqrt v).
// The second form avoids cancellation for large |z|.
std::pair<cplx, cplx> semicircle_transform(cplx z, double v) {
  const double e = 2.0 * std::sqrt(v);
  const cplx s = std::sqrt(z - e) * std::sqrt(z + e);
  const cplx g = 2.0 / (z + s);
  return {g, -g / s};
}

// Marchenko-Pastur with ratio c, atom 1 - 1/c at 0 included when c > 1.
std::pair<cplx, cplx> mp_transform(cplx z, double c) {
  const double lm = std::pow(1.0 - std::sqrt(c), 2), lp = std::pow(1.0 + std::sqrt(c), 2);
  const cplx a = std::sqrt(z - lm), b = std::sqrt(z - lp);
  const cplx s = a * b;
  const cplx ds = 0.5 * (a / b + b / a);
  // (z + c - 1 - s)/(2cz) rewritten as 2/(z + c - 1 + s).
  const cplx g = 2.0 / (z + c - 1.0 + s);
  return {g, -0.5 * g * g * (1.0 + ds)};
}

// Symmetrized singular values: g(z) = z h(z^2), h(w) = sqrt(beta) G(sqrt(beta) w).
std::pair<cplx, cplx> rect_mp_transform(cplx z, double beta) {
  const double sb = std::sqrt(beta);
  const cplx w = z * z;
  const auto [G, dG] = mp_transform(sb * w, beta);
  const cplx h = sb * G, dh = beta * dG;
  return {z * h, h + 2.0 * w * dh};
}

}  // namespace

CauchyEvaluator::CauchyEvaluator(const SpectralMeasure& mu, bool allow_analytic) {
  if (allow_analytic) law_ = mu.analytic();
  if (law_.kind != AnalyticLaw::Kind::None) return;
  x_ = mu.grid();
  f_ = mu.density();
  atoms_ = mu.atoms();
  h_ = mu.spacing();
  std::tie(first_, last_) = mu.active_range();
}

std::pair<cplx, cplx> CauchyEvaluator::grid_part(cplx z) const {
  if (last_ < first_) return {0.0, 0.0};
  const double zr = z.real(), zi = z.imag();
  const int n = int(x_.size());
  // Hat functions are indexed by interior nodes; zero end values drop out.
  const int lo = std::max(first_, 1), hi = std::min(last_, n - 2);
  int nlo = hi + 1, nhi = hi;  // near window [nlo, nhi], empty by default
  if (zi < kNear * h_) {
    const double pos = (zr - x_[0]) / h_;
    if (pos > lo - kNear - 1 && pos < hi + kNear + 1) {
      const int c = int(std::floor(pos));
      nlo = std::max(lo, c - kNear);
      nhi = std::min(hi, c + kNear + 1);
      if (nlo > nhi) {
        nlo = hi + 1;
        nhi = hi;
      }
    }
  }
  double acc[4] = {0, 0, 0, 0}, part[4];
  if (nlo > hi) {
    kernels::cauchy_far(x_.data(), f_.data(), lo, hi + 1, zr, zi, h_, acc);
  } else {
    kernels::cauchy_far(x_.data(), f_.data(), lo, nlo, zr, zi, h_, part);
    for (int i = 0; i < 4; ++i) acc[i] += part[i];
    kernels::cauchy_far(x_.data(), f_.data(), nhi + 1, hi + 1, zr, zi, h_, part);
    for (int i = 0; i < 4; ++i) acc[i] += part[i];
  }
  cplx g(acc[0], acc[1]), dg(acc[2], acc[3]);
  if (nlo <= nhi) {
    // Exact hat transforms via second differences of u log u and log u.
    const int m = nhi - nlo + 3;
    cplx phi[2 * kNear + 8], lg[2 * kNear + 8];
    for (int j = 0; j < m; ++j) {
      const cplx u = z - x_[nlo - 1 + j];
      lg[j] = std::log(u);
      phi[j] = u * lg[j];
    }
    const double inv = 1.0 / h_;
    for (int k = nlo; k <= nhi; ++k) {
      const int j = k - nlo + 1;
      g += f_[k] * (phi[j - 1] - 2.0 * phi[j] + phi[j + 1]) * inv;
      dg += f_[k] * (lg[j - 1] - 2.0 * lg[j] + lg[j + 1]) * inv;
    }
  }
  return {g, dg};
}

std::pair<cplx, cplx> CauchyEvaluator::operator()(cplx z) const {
  if (!(z.imag() > 0.0)) throw DomainError("Cauchy transform needs Im z > 0");
  switch (law_.kind) {
    case AnalyticLaw::Kind::None: break;
    case AnalyticLaw::Kind::Semicircle:
    case AnalyticLaw::Kind::MarchenkoPastur:
    case AnalyticLaw::Kind::RectMarchenkoPastur: {
      const double s = law_.scale;
      const cplx w = z / s;
      std::pair<cplx, cplx> r;
      if (law_.kind == AnalyticLaw::Kind::Semicircle)
        r = semicircle_transform(w, law_.param);
      else if (law_.kind == AnalyticLaw::Kind::MarchenkoPastur)
        r = mp_transform(w, law_.param);
      else
        r = rect_mp_transform(w, law_.param);
      return {r.first / s, r.second / (s * s)};
    }
  }
  auto [g, dg] = grid_part(z);
  for (const Atom& a : atoms_) {
    const cplx inv = 1.0 / (z - a.location);
    g += a.mass * inv;
    dg -= a.mass * inv * inv;
  }
  return {g, dg};
}

cplx cauchy_transform(const SpectralMeasure& mu, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("Cauchy transform needs Im z > 0");
  return CauchyEvaluator(mu, false)(z).first;
}

double stieltjes_density(const SpectralMeasure& mu, double x, double eta) {
  return -cauchy_transform(mu, cplx(x, eta)).imag() / std::numbers::pi;
}

}  // namespace sensing
