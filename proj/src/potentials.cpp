#include <algorithm>
#include <functional>
#include <cmath>
#include <map>
#include <mutex>

#include "sensing/errors.hpp"
#include "sensing/freeconv.hpp"

namespace sensing {

namespace {
constexpr double kNormalizationPoint = 1e-6;

// First two moments, exact for laws with a closed form so that rho matches the prior.
std::pair<double, double> low_moments(const SpectralMeasure& mu) {
  const AnalyticLaw law = mu.analytic();
  const double s = law.scale;
  switch (law.kind) {
    case AnalyticLaw::Kind::Semicircle:
      return {0.0, law.param * s * s};
    case AnalyticLaw::Kind::MarchenkoPastur:
      return {s, (1.0 + law.param) * s * s};
    case AnalyticLaw::Kind::RectMarchenkoPastur:
      return {0.0, s * s / std::sqrt(law.param)};
    case AnalyticLaw::Kind::None:
      break;
  }
  return {moment(mu, 1), moment(mu, 2)};
}
}  // namespace

struct DenoisingPotential::Cache {
  std::mutex mu;
  std::map<double, double> values;
};

DenoisingPotential::DenoisingPotential(SpectralMeasure mu, double beta)
    : mu_(std::move(mu)), beta_(beta), cache_(std::make_unique<Cache>()) {
  const auto [m1, m2] = low_moments(mu_);
  if (beta_ > 0.0) {
    rho_ = std::sqrt(beta_) * m2;
    mean_ = 0.0;
    coupling_ = 2.0;
    // psi_rec(0+) = 0, continued to the normalization point by the limiting slope.
    constant_ = -raw(kNormalizationPoint) + limit_slope() * kNormalizationPoint;
  } else {
    rho_ = m2;
    mean_ = m1;
    coupling_ = 4.0;
  }
}

DenoisingPotential::~DenoisingPotential() = default;

namespace {

// Potentials are shared per (measure, beta) so their memo tables are reused.
std::shared_ptr<const DenoisingPotential> shared_potential(
    const SpectralMeasure& mu, double beta,
    const std::function<std::shared_ptr<const DenoisingPotential>()>& make) {
  static std::mutex guard;
  static std::map<std::pair<std::uint64_t, double>, std::shared_ptr<const DenoisingPotential>> registry;
  const auto key = std::make_pair(mu.fingerprint(), beta);
  {
    std::lock_guard<std::mutex> lock(guard);
    auto it = registry.find(key);
    if (it != registry.end()) return it->second;
  }
  auto p = make();
  std::lock_guard<std::mutex> lock(guard);
  if (registry.size() > 64) registry.clear();
  return registry.emplace(key, p).first->second;
}

}  // namespace

std::shared_ptr<const DenoisingPotential> DenoisingPotential::symmetric(const SpectralMeasure& mu0) {
  return shared_potential(mu0, 0.0, [&] {
    return std::shared_ptr<const DenoisingPotential>(new DenoisingPotential(mu0, 0.0));
  });
}

std::shared_ptr<const DenoisingPotential> DenoisingPotential::rectangular(const SpectralMeasure& mu0_sym,
                                                                          double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in (0, 1]");
  if (!mu0_sym.is_symmetric(1e-8)) throw InvalidParameter("rectangular potential needs a symmetric measure");
  return shared_potential(mu0_sym, beta, [&] {
    return std::shared_ptr<const DenoisingPotential>(new DenoisingPotential(mu0_sym, beta));
  });
}

double DenoisingPotential::raw(double r) const {
  if (beta_ > 0.0) {
    const SpectralMeasure mt = rect_convolve(mu_, 1.0 / r, beta_).measure;
    double v = -0.5 * std::log(r) - beta_ * log_energy(mt);
    if (beta_ < 1.0) v -= (1.0 - beta_) * log_abs_moment(mt);
    return v;
  }
  const SpectralMeasure mt = semicircle_convolve(mu_, 1.0 / r).measure;
  return -0.5 * log_energy(mt) - 0.25 * std::log(r) - 0.375;
}

double DenoisingPotential::value(double r) const {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("denoising potential needs r > 0");
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->values.find(r);
    if (it != cache_->values.end()) return it->second;
  }
  const double v = raw(r) + constant_;
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->values.emplace(r, v);
  return v;
}

double DenoisingPotential::derivative(double r) const {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("denoising potential needs r > 0");
  const double h = 1e-4 * std::max(r, 1.0);
  double d;
  if (r - h > 0.0)
    d = (value(r + h) - value(r - h)) / (2.0 * h);
  else
    d = (-3.0 * value(r) + 4.0 * value(r + h) - value(r + 2.0 * h)) / (2.0 * h);
  return std::clamp(d, -rho_ / coupling_, 0.0);
}

double DenoisingPotential::limit_value() const { return beta_ > 0.0 ? 0.0 : -0.25; }

double DenoisingPotential::limit_slope() const { return -(rho_ - mean_ * mean_) / coupling_; }

double psi_p0(const SpectralMeasure& mu0, double r) { return DenoisingPotential::symmetric(mu0)->value(r); }
double psi_p0_prime(const SpectralMeasure& mu0, double r) {
  return DenoisingPotential::symmetric(mu0)->derivative(r);
}
double psi_rec(const SpectralMeasure& mu0_sym, double r, double beta) {
  return DenoisingPotential::rectangular(mu0_sym, beta)->value(r);
}
double psi_rec_prime(const SpectralMeasure& mu0_sym, double r, double beta) {
  return DenoisingPotential::rectangular(mu0_sym, beta)->derivative(r);
}

}  // namespace sensing
