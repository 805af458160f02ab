#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace sensing {

using cplx = std::complex<double>;

struct Atom {
  double location;
  double mass;
};

// Tag for measures whose Cauchy transform has a closed form.
struct AnalyticLaw {
  enum class Kind { None, Semicircle, MarchenkoPastur, RectMarchenkoPastur };
  Kind kind = Kind::None;
  double param = 0.0;  // variance, ratio c = 1/kappa, or beta
  double scale = 1.0;  // law of scale * X
};

// Probability measure on the line: piecewise-linear density on a uniform grid
// (zero at both ends) plus separately stored atoms.
class SpectralMeasure {
 public:
  SpectralMeasure(std::vector<double> grid, std::vector<double> density,
                  std::vector<Atom> atoms = {});

  static SpectralMeasure point_mass(double location);
  // Equal-weight atoms, duplicates merged.
  static SpectralMeasure empirical(std::vector<double> samples);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& density() const { return density_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  double support_radius() const { return radius_; }
  double spacing() const { return h_; }
  bool has_density() const { return !grid_.empty(); }
  double density_mass() const;
  double total_mass() const;
  double density_at(double x) const;
  // Smallest and largest points of the support (grid extent or atoms).
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  // Index range [first, last] of nonzero density values; (0, -1) if none.
  std::pair<int, int> active_range() const { return active_; }

  const AnalyticLaw& analytic() const { return analytic_; }
  SpectralMeasure with_analytic(AnalyticLaw law) const;
  SpectralMeasure scaled(double s) const;
  bool is_symmetric(double tol = 1e-8) const;
  std::uint64_t fingerprint() const;

 private:
  SpectralMeasure() = default;
  void finalize();

  std::vector<double> grid_;
  std::vector<double> density_;
  std::vector<Atom> atoms_;
  double radius_ = 0.0;
  double h_ = 0.0;
  double lower_ = 0.0;
  double upper_ = 0.0;
  std::pair<int, int> active_{0, -1};
  AnalyticLaw analytic_;
};

inline constexpr int kDefaultGridPoints = 4096;
inline constexpr double kGridSpan = 1.05;

SpectralMeasure semicircle(double variance);
SpectralMeasure marchenko_pastur(double kappa);
SpectralMeasure symmetrized_rect_gaussian(double beta);

// Gaussian-kernel smoothing of samples onto a uniform grid. The samples are
// shrunk towards their mean so that the second moment is preserved.
SpectralMeasure smoothed_empirical(const std::vector<double>& samples, double bandwidth,
                                   int grid_points = kDefaultGridPoints);

// g(z) = int mu(dx) / (z - x), Im z > 0, by exact integration of the
// piecewise-linear density plus atom terms.
cplx cauchy_transform(const SpectralMeasure& mu, cplx z);
// -Im g(x + i eta) / pi
double stieltjes_density(const SpectralMeasure& mu, double x, double eta = 1e-6);

double log_energy(const SpectralMeasure& mu);
double log_abs_moment(const SpectralMeasure& mu);
double moment(const SpectralMeasure& mu, int k);
double wasserstein2(const SpectralMeasure& mu, const SpectralMeasure& nu);

void write_measure(std::ostream& os, const SpectralMeasure& mu);
SpectralMeasure read_measure(std::istream& is);
void save_measure(const std::string& path, const SpectralMeasure& mu);
SpectralMeasure load_measure(const std::string& path);

// Evaluates g and g' repeatedly for one measure. Uses the closed form when the
// measure carries one and `allow_analytic` is set.
class CauchyEvaluator {
 public:
  explicit CauchyEvaluator(const SpectralMeasure& mu, bool allow_analytic = true);
  std::pair<cplx, cplx> operator()(cplx z) const;
  bool analytic() const { return law_.kind != AnalyticLaw::Kind::None; }

 private:
  std::pair<cplx, cplx> grid_part(cplx z) const;

  AnalyticLaw law_;
  std::vector<double> x_;
  std::vector<double> f_;
  std::vector<Atom> atoms_;
  double h_ = 0.0;
  int first_ = 0;
  int last_ = -1;
};

}  // namespace sensing
