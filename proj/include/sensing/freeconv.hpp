#pragma once

#include <memory>

#include "sensing/measures.hpp"

namespace sensing {

struct ConvolutionResult {
  SpectralMeasure measure;
  double noise_scale;
  long iterations;      // Newton and damped fixed-point steps, summed over the grid
  double max_residual;  // sup of |omega - z + t g(omega)| / max(1, |z|)
};

// mu0 boxplus sc(t) via the subordination fixed point g_t(z) = g0(z - t g_t(z)).
ConvolutionResult semicircle_convolve(const SpectralMeasure& mu0, double t);

// Symmetrized singular-value law of S + sqrt(t) Z, Z with i.i.d. entries of
// variance 1/sqrt(dL), d/L = beta, from the hermitized self-consistent equations.
ConvolutionResult rect_convolve(const SpectralMeasure& mu0_sym, double t, double beta);

double psi_p0(const SpectralMeasure& mu0, double r);
double psi_p0_prime(const SpectralMeasure& mu0, double r);
double psi_rec(const SpectralMeasure& mu0_sym, double r, double beta);
double psi_rec_prime(const SpectralMeasure& mu0_sym, double r, double beta);

// A denoising potential bound to one prior measure, with memoized values.
// Symmetric: psi_P0 (coupling 4). Rectangular: psi_rec (coupling 2).
class DenoisingPotential {
 public:
  static std::shared_ptr<const DenoisingPotential> symmetric(const SpectralMeasure& mu0);
  static std::shared_ptr<const DenoisingPotential> rectangular(const SpectralMeasure& mu0_sym, double beta);

  ~DenoisingPotential();

  double value(double r) const;       // r > 0
  double derivative(double r) const;  // finite difference, clamped to [-rho/k, 0]
  double limit_value() const;         // r -> 0+
  double limit_slope() const;         // derivative at 0+
  double rho() const { return rho_; }
  double coupling() const { return coupling_; }
  bool rectangular() const { return beta_ > 0.0; }
  double beta() const { return beta_; }
  const SpectralMeasure& measure() const { return mu_; }

 private:
  DenoisingPotential(SpectralMeasure mu, double beta);
  double raw(double r) const;

  struct Cache;
  SpectralMeasure mu_;
  double beta_;  // 0 for the symmetric potential
  double rho_;
  double mean_;
  double coupling_;
  double constant_ = 0.0;
  std::unique_ptr<Cache> cache_;
};

}  // namespace sensing
