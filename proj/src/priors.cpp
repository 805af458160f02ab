#include "sensing/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sensing/errors.hpp"
#include "sensing/linalg.hpp"
#include "sensing/random.hpp"

namespace sensing {

namespace {

PriorSpec make(PriorKind kind, SpectralMeasure mu, double rho, bool psd, bool rectangular) {
  return PriorSpec{kind, 0.0, 1.0, 0.0, rho, psd, rectangular, std::move(mu)};
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in (0, 1]");
}

Eigen::MatrixXd gaussian(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = n01(gen);
  return m;
}

int columns_for(const PriorSpec& prior, int d) {
  return std::max(d, int(std::lround(double(d) / prior.beta)));
}

}  // namespace

std::string PriorSpec::name() const {
  switch (kind) {
    case PriorKind::Goe: return "goe";
    case PriorKind::Wishart: return "wishart";
    case PriorKind::RectGaussian: return "rect_gaussian";
    case PriorKind::RectProduct: return "rect_product";
    case PriorKind::Empirical: return "empirical";
  }
  return "unknown";
}

PriorSpec goe_prior() { return make(PriorKind::Goe, semicircle(1.0), 1.0, false, false); }

PriorSpec wishart_prior(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidParameter("wishart kappa must be positive");
  if (kappa == 1.0)
    throw UnsupportedParameter("wishart kappa = 1 is unsupported: the limiting law has a hard edge at 0");
  PriorSpec p = make(PriorKind::Wishart, marchenko_pastur(kappa), 1.0 + 1.0 / kappa, true, false);
  p.kappa = kappa;
  return p;
}

PriorSpec rect_gaussian_prior(double beta) {
  check_beta(beta);
  PriorSpec p = make(PriorKind::RectGaussian, symmetrized_rect_gaussian(beta), 1.0, false, true);
  p.beta = beta;
  return p;
}

PriorSpec rect_product_prior(double beta, double rank_ratio, const ProductSampling& sampling) {
  check_beta(beta);
  if (!(rank_ratio > 0.0) || !std::isfinite(rank_ratio)) throw InvalidParameter("rank_ratio must be positive");
  // The sampler only reads kind, beta and rank_ratio.
  PriorSpec p = make(PriorKind::RectProduct, SpectralMeasure::point_mass(0.0), 1.0, false, true);
  p.beta = beta;
  p.rank_ratio = rank_ratio;
  p.limiting_measure = sample_singular_law(p, sampling.d, sampling.reps, sampling.seed);
  p.rho = std::sqrt(beta) * moment(p.limiting_measure, 2);
  return p;
}

PriorSpec empirical_prior(SpectralMeasure mu, double rho, bool psd, bool rectangular, double beta) {
  if (rectangular) {
    check_beta(beta);
    if (!mu.is_symmetric(1e-8)) throw InvalidParameter("rectangular empirical prior needs a symmetric measure");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidParameter("rho must be positive");
  const double m2 = (rectangular ? std::sqrt(beta) : 1.0) * moment(mu, 2);
  if (std::abs(m2 - rho) > 1e-6)
    throw InvalidParameter("rho " + std::to_string(rho) + " differs from the measure's second moment " +
                           std::to_string(m2));
  if (psd && support_min(mu) < 0.0) throw InvalidParameter("psd prior with mass on negative values");
  PriorSpec p = make(PriorKind::Empirical, std::move(mu), rho, psd, rectangular);
  p.beta = rectangular ? beta : 1.0;
  return p;
}

int product_rank(double rank_ratio, int d, int L) {
  return std::max(1, int(std::ceil(rank_ratio * std::sqrt(double(d) * double(L)))));
}

Eigen::MatrixXd sample_matrix(const PriorSpec& prior, int d, int L, std::uint64_t seed) {
  if (d < 2) throw InvalidParameter("dimension d must be at least 2");
  if (prior.rectangular && L < d) throw InvalidParameter("rectangular samples need L >= d");
  std::mt19937_64 gen = make_engine(seed);
  switch (prior.kind) {
    case PriorKind::Goe: {
      const Eigen::MatrixXd g = gaussian(d, d, gen);
      return (g + g.transpose()) / std::sqrt(2.0 * d);
    }
    case PriorKind::Wishart: {
      const int m = int(std::ceil(prior.kappa * d));
      const Eigen::MatrixXd w = gaussian(m, d, gen);
      return (w.transpose() * w) / double(m);
    }
    case PriorKind::RectGaussian:
      return gaussian(d, L, gen) / std::pow(double(d) * double(L), 0.25);
    case PriorKind::RectProduct: {
      const int k = product_rank(prior.rank_ratio, d, L);
      const Eigen::MatrixXd u = gaussian(d, k, gen), v = gaussian(k, L, gen);
      // E Tr S S^T = d L k / c^2, so c^2 = k sqrt(dL) gives rho = 1.
      return (u * v) / std::sqrt(double(k) * std::sqrt(double(d) * double(L)));
    }
    case PriorKind::Empirical:
      break;
  }
  throw InvalidParameter("empirical priors have no finite-dimensional sampler");
}

SpectralMeasure sample_singular_law(const PriorSpec& prior, int d, int reps, std::uint64_t seed) {
  if (reps < 1) throw InvalidParameter("reps must be at least 1");
  const int L = prior.rectangular ? columns_for(prior, d) : d;
  std::vector<double> pooled;
  for (int rep = 0; rep < reps; ++rep) {
    const Eigen::MatrixXd s = sample_matrix(prior, d, L, derive_seed(seed, std::uint64_t(rep)));
    if (prior.rectangular) {
      for (double v : singular_values(s)) {
        pooled.push_back(v);
        pooled.push_back(-v);
      }
    } else {
      const auto ev = symmetric_eigenvalues(s);
      pooled.insert(pooled.end(), ev.begin(), ev.end());
    }
  }
  const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
  const SpectralMeasure mu = smoothed_empirical(pooled, smoothing_bandwidth(*lo, *hi, pooled.size()));
  return prior.rectangular ? symmetrize(mu) : mu;
}

double smoothing_bandwidth(double lo, double hi, std::size_t n) {
  const double span = std::max(hi - lo, 1e-3);
  return 0.25 * span / std::sqrt(double(std::max<std::size_t>(n, 1)));
}

SpectralMeasure symmetrize(const SpectralMeasure& mu) {
  std::vector<Atom> atoms;
  for (const Atom& a : mu.atoms()) {
    atoms.push_back({a.location, 0.5 * a.mass});
    atoms.push_back({-a.location, 0.5 * a.mass});
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  if (!mu.has_density()) return SpectralMeasure({}, {}, std::move(atoms));
  const auto& x0 = mu.grid();
  const std::size_t n = x0.size();
  const double edge = std::max(std::abs(x0.front()), std::abs(x0.back()));
  std::vector<double> x(n), f(n);
  const double step = 2.0 * edge / double(n - 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = -edge + double(i) * step;
  for (std::size_t i = 0; i < n / 2; ++i) x[n - 1 - i] = -x[i];
  if (n % 2 == 1) x[n / 2] = 0.0;
  const bool aligned = std::abs(x0.front() + x0.back()) <= 1e-12 * edge;
  for (std::size_t i = 0; i < n; ++i) f[i] = aligned ? mu.density()[i] : mu.density_at(x[i]);
  for (std::size_t i = 0; i < n / 2; ++i) f[i] = f[n - 1 - i] = 0.5 * (f[i] + f[n - 1 - i]);
  f.front() = f.back() = 0.0;
  double mass = 0.0;
  for (double v : f) mass += v * step;
  if (mass > 0.0)
    for (double& v : f) v *= mu.density_mass() / mass;
  return SpectralMeasure(std::move(x), std::move(f), std::move(atoms));
}

double support_min(const SpectralMeasure& mu) {
  double m = std::numeric_limits<double>::infinity();
  for (const Atom& a : mu.atoms())
    if (a.mass > 0.0) m = std::min(m, a.location);
  const auto [first, last] = mu.active_range();
  // The piecewise-linear density is positive strictly inside the neighbouring cell.
  if (last >= first) m = std::min(m, mu.grid()[std::max(first - 1, 0)]);
  return m;
}

}  // namespace sensing
