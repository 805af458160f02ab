#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "sensing/measures.hpp"

namespace sensing {

enum class PriorKind { Goe, Wishart, RectGaussian, RectProduct, Empirical };

// A signal ensemble with its limiting spectral measure. For rectangular kinds
// the measure is the symmetrized singular-value law and rho = sqrt(beta) m2.
struct PriorSpec {
  PriorKind kind;
  double kappa = 0.0;       // wishart
  double beta = 1.0;        // rectangular aspect ratio d/L
  double rank_ratio = 0.0;  // rect_product
  double rho;
  bool psd;
  bool rectangular;
  SpectralMeasure limiting_measure;

  std::string name() const;
};

// Settings for the empirical limiting measure of rect_product.
struct ProductSampling {
  int d = 500;
  int reps = 4;
  std::uint64_t seed = 0x5eedull;
};

PriorSpec goe_prior();
PriorSpec wishart_prior(double kappa);
PriorSpec rect_gaussian_prior(double beta);
PriorSpec rect_product_prior(double beta, double rank_ratio, const ProductSampling& sampling = {});
// rho is checked against the measure's second moment within 1e-6.
PriorSpec empirical_prior(SpectralMeasure mu, double rho, bool psd, bool rectangular = false, double beta = 1.0);

// Inner rank of a rect_product draw: ceil(rank_ratio sqrt(dL)).
int product_rank(double rank_ratio, int d, int L);

// One d x d (symmetric kinds) or d x L (rectangular kinds) draw.
Eigen::MatrixXd sample_matrix(const PriorSpec& prior, int d, int L, std::uint64_t seed);

// Symmetrized singular values (rectangular, L = round(d / beta)) or
// eigenvalues pooled over reps draws, Gaussian-smoothed onto a uniform grid.
SpectralMeasure sample_singular_law(const PriorSpec& prior, int d, int reps, std::uint64_t seed);

// Kernel bandwidth for smoothing n pooled samples spread over [lo, hi].
double smoothing_bandwidth(double lo, double hi, std::size_t n);

// Mirror-average a measure about 0 so that it is exactly symmetric.
SpectralMeasure symmetrize(const SpectralMeasure& mu);

// Smallest point carrying mass.
double support_min(const SpectralMeasure& mu);

}  // namespace sensing
