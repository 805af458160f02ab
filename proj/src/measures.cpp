#include "sensing/measures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <limits>
#include <numeric>

#include "sensing/errors.hpp"
#include "sensing/kernels.hpp"
#include "sensing/quadrature.hpp"

namespace sensing {

SpectralMeasure::SpectralMeasure(std::vector<double> grid, std::vector<double> density,
                                 std::vector<Atom> atoms)
    : grid_(std::move(grid)), density_(std::move(density)), atoms_(std::move(atoms)) {
  finalize();
}

void SpectralMeasure::finalize() {
  const std::size_t n = grid_.size();
  if (density_.size() != n) throw InvalidParameter("grid and density sizes differ");
  if (n == 0 && atoms_.empty()) throw InvalidParameter("measure has neither density nor atoms");
  if (n > 0) {
    if (n < 3) throw InvalidParameter("density grid needs at least 3 points");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(grid_[i]) || !std::isfinite(density_[i]))
        throw InvalidParameter("non-finite grid or density value");
      if (density_[i] < 0.0) throw InvalidParameter("negative density value");
      if (i > 0 && !(grid_[i] > grid_[i - 1])) throw InvalidParameter("grid not strictly increasing");
    }
    h_ = (grid_.back() - grid_.front()) / double(n - 1);
    const double tol = 1e-9 * std::max({std::abs(grid_.front()), std::abs(grid_.back()), grid_.back() - grid_.front()});
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(grid_[i] - (grid_.front() + double(i) * h_)) > tol)
        throw InvalidParameter("density grid must be uniform");
    if (density_.front() != 0.0 || density_.back() != 0.0)
      throw InvalidParameter("density must vanish at both grid ends");
    int first = -1, last = -1;
    for (std::size_t i = 0; i < n; ++i)
      if (density_[i] > 0.0) {
        if (first < 0) first = int(i);
        last = int(i);
      }
    active_ = first < 0 ? std::pair<int, int>{0, -1} : std::pair<int, int>{first, last};
  }
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.location)) throw InvalidParameter("non-finite atom location");
    if (!(a.mass > 0.0 && a.mass <= 1.0)) throw InvalidParameter("atom mass outside (0, 1]");
  }
  const double mass = total_mass();
  if (std::abs(mass - 1.0) > 1e-8) throw InvalidParameter("total mass differs from 1 by more than 1e-8");

  lower_ = n > 0 ? grid_.front() : atoms_.front().location;
  upper_ = n > 0 ? grid_.back() : atoms_.back().location;
  if (!atoms_.empty()) {
    lower_ = std::min(lower_, atoms_.front().location);
    upper_ = std::max(upper_, atoms_.back().location);
  }
  radius_ = std::max(std::abs(lower_), std::abs(upper_));
}

double SpectralMeasure::density_mass() const {
  double s = 0.0;
  for (double f : density_) s += f;
  return s * h_;
}

double SpectralMeasure::total_mass() const {
  double m = density_mass();
  for (const Atom& a : atoms_) m += a.mass;
  return m;
}

double SpectralMeasure::density_at(double x) const {
  if (grid_.empty() || x <= grid_.front() || x >= grid_.back()) return 0.0;
  const double s = (x - grid_.front()) / h_;
  const std::size_t j = std::min<std::size_t>(std::size_t(s), grid_.size() - 2);
  const double t = s - double(j);
  return density_[j] * (1.0 - t) + density_[j + 1] * t;
}

SpectralMeasure SpectralMeasure::point_mass(double location) {
  SpectralMeasure m;
  m.atoms_.push_back({location, 1.0});
  m.finalize();
  return m;
}

SpectralMeasure SpectralMeasure::empirical(std::vector<double> samples) {
  if (samples.empty()) throw InvalidParameter("empirical measure needs samples");
  std::sort(samples.begin(), samples.end());
  SpectralMeasure m;
  const double w = 1.0 / double(samples.size());
  for (double s : samples) {
    if (!m.atoms_.empty() && m.atoms_.back().location == s)
      m.atoms_.back().mass += w;
    else
      m.atoms_.push_back({s, w});
  }
  // Absorb rounding in the masses so they sum to one.
  double total = 0.0;
  for (const Atom& a : m.atoms_) total += a.mass;
  for (Atom& a : m.atoms_) a.mass /= total;
  m.finalize();
  return m;
}

SpectralMeasure SpectralMeasure::with_analytic(AnalyticLaw law) const {
  SpectralMeasure m = *this;
  m.analytic_ = law;
  return m;
}

SpectralMeasure SpectralMeasure::scaled(double s) const {
  if (!(std::isfinite(s) && s != 0.0)) throw InvalidParameter("scale factor must be finite and nonzero");
  SpectralMeasure m;
  const std::size_t n = grid_.size();
  m.grid_.resize(n);
  m.density_.resize(n);
  // Rebuild the grid from its endpoints to keep it exactly uniform.
  const double a = s > 0 ? s * grid_.front() : s * grid_.back();
  const double step = std::abs(s) * h_;
  for (std::size_t i = 0; i < n; ++i) {
    m.grid_[i] = a + double(i) * step;
    m.density_[i] = (s > 0 ? density_[i] : density_[n - 1 - i]) / std::abs(s);
  }
  if (n > 0) m.grid_.back() = s > 0 ? s * grid_.back() : s * grid_.front();
  for (const Atom& at : atoms_) m.atoms_.push_back({s * at.location, at.mass});
  m.finalize();
  if (analytic_.kind != AnalyticLaw::Kind::None && s > 0) {
    m.analytic_ = analytic_;
    m.analytic_.scale *= s;
  }
  return m;
}

bool SpectralMeasure::is_symmetric(double tol) const {
  const std::size_t n = grid_.size();
  if (n > 0) {
    if (std::abs(grid_.front() + grid_.back()) > tol) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(density_[i] - density_[n - 1 - i]) > tol) return false;
  }
  const std::size_t na = atoms_.size();
  for (std::size_t i = 0; i < na; ++i) {
    const Atom& a = atoms_[i];
    const Atom& b = atoms_[na - 1 - i];
    if (std::abs(a.location + b.location) > tol || std::abs(a.mass - b.mass) > tol) return false;
  }
  return true;
}

std::uint64_t SpectralMeasure::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double v) {
    std::uint64_t b = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (b >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (double v : grid_) mix(v);
  for (double v : density_) mix(v);
  for (const Atom& a : atoms_) {
    mix(a.location);
    mix(a.mass);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Constructors

namespace {

// Mass of a density on [lo, hi] restricted to [a, b], integrated in the
// variable x = lo + (hi - lo) sin^2(theta), which removes square-root edges.
double edge_mass(const std::function<double(double)>& p, double lo, double hi, double a, double b) {
  a = std::max(a, lo);
  b = std::min(b, hi);
  if (!(b > a)) return 0.0;
  auto theta = [&](double x) { return std::asin(std::sqrt(std::clamp((x - lo) / (hi - lo), 0.0, 1.0))); };
  const double ta = theta(a), tb = theta(b);
  const auto& gl = gauss_legendre(12);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double t = 0.5 * (ta + tb) + 0.5 * (tb - ta) * gl.nodes[i];
    const double st = std::sin(t), ct = std::cos(t);
    const double x = lo + (hi - lo) * st * st;
    s += gl.weights[i] * p(x) * (hi - lo) * 2.0 * st * ct;
  }
  return s * 0.5 * (tb - ta);
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  const double c = 0.5 * (lo + hi), half = 0.5 * (hi - lo) * kGridSpan;
  std::vector<double> x(n);
  const double step = 2.0 * half / double(n - 1);
  for (int i = 0; i < n; ++i) x[i] = c - half + double(i) * step;
  x.back() = c + half;
  // Exact mirror symmetry for centred grids.
  if (c == 0.0)
    for (int i = 0; i < n / 2; ++i) x[n - 1 - i] = -x[i];
  return x;
}

// Node values equal to cell averages of the mass function over [x - h/2, x + h/2].
std::vector<double> cell_averages(const std::vector<double>& x,
                                  const std::function<double(double, double)>& mass) {
  const std::size_t n = x.size();
  const double h = (x.back() - x.front()) / double(n - 1);
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) f[i] = mass(x[i] - 0.5 * h, x[i] + 0.5 * h) / h;
  return f;
}

void normalize(std::vector<double>& f, double h, double target) {
  double s = 0.0;
  for (double v : f) s += v;
  s *= h;
  if (s > 0.0)
    for (double& v : f) v *= target / s;
}

void symmetrize(std::vector<double>& f) {
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double v = 0.5 * (f[i] + f[n - 1 - i]);
    f[i] = v;
    f[n - 1 - i] = v;
  }
}

// Continuous part of the Marchenko-Pastur law with ratio c (atom excluded).
double mp_density(double x, double c) {
  const double lm = std::pow(1.0 - std::sqrt(c), 2), lp = std::pow(1.0 + std::sqrt(c), 2);
  if (x <= lm || x >= lp || x <= 0.0) return 0.0;
  return std::sqrt((lp - x) * (x - lm)) / (2.0 * std::numbers::pi * c * x);
}

}  // namespace

SpectralMeasure semicircle(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw InvalidParameter("semicircle variance must be positive");
  const double r = 2.0 * std::sqrt(variance);
  auto p = [variance](double x) {
    return std::sqrt(std::max(0.0, 4.0 * variance - x * x)) / (2.0 * std::numbers::pi * variance);
  };
  std::vector<double> x = uniform_grid(-r, r, kDefaultGridPoints);
  std::vector<double> f = cell_averages(x, [&](double a, double b) { return edge_mass(p, -r, r, a, b); });
  symmetrize(f);
  normalize(f, (x.back() - x.front()) / double(x.size() - 1), 1.0);
  return SpectralMeasure(std::move(x), std::move(f)).with_analytic({AnalyticLaw::Kind::Semicircle, variance, 1.0});
}

SpectralMeasure marchenko_pastur(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidParameter("Marchenko-Pastur kappa must be positive");
  const double c = 1.0 / kappa;
  const double lm = std::pow(1.0 - std::sqrt(c), 2), lp = std::pow(1.0 + std::sqrt(c), 2);
  const double atom = kappa < 1.0 ? 1.0 - kappa : 0.0;
  auto p = [c](double x) { return mp_density(x, c); };
  std::vector<double> x = uniform_grid(lm, lp, kDefaultGridPoints);
  std::vector<double> f = cell_averages(x, [&](double a, double b) { return edge_mass(p, lm, lp, a, b); });
  normalize(f, (x.back() - x.front()) / double(x.size() - 1), 1.0 - atom);
  std::vector<Atom> atoms;
  if (atom > 0.0) atoms.push_back({0.0, atom});
  return SpectralMeasure(std::move(x), std::move(f), std::move(atoms))
      .with_analytic({AnalyticLaw::Kind::MarchenkoPastur, c, 1.0});
}

SpectralMeasure symmetrized_rect_gaussian(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in (0, 1]");
  // Squared singular values are lambda / sqrt(beta), lambda ~ MP with ratio beta.
  const double sb = std::sqrt(beta);
  const double lm = std::pow(1.0 - sb, 2), lp = std::pow(1.0 + sb, 2);
  const double smax = std::sqrt(lp / sb);
  auto p = [beta](double l) { return mp_density(l, beta); };
  // Mass of x in [a, b] with 0 <= a < b is half the MP mass of [sb a^2, sb b^2].
  auto half_mass = [&](double a, double b) { return 0.5 * edge_mass(p, lm, lp, sb * a * a, sb * b * b); };
  auto mass = [&](double a, double b) {
    if (a >= 0.0) return half_mass(a, b);
    if (b <= 0.0) return half_mass(-b, -a);
    return half_mass(0.0, -a) + half_mass(0.0, b);
  };
  std::vector<double> x = uniform_grid(-smax, smax, kDefaultGridPoints);
  std::vector<double> f = cell_averages(x, mass);
  symmetrize(f);
  normalize(f, (x.back() - x.front()) / double(x.size() - 1), 1.0);
  return SpectralMeasure(std::move(x), std::move(f)).with_analytic({AnalyticLaw::Kind::RectMarchenkoPastur, beta, 1.0});
}

SpectralMeasure smoothed_empirical(const std::vector<double>& samples, double bandwidth, int grid_points) {
  if (samples.empty()) throw InvalidParameter("no samples to smooth");
  if (!(bandwidth > 0.0)) throw InvalidParameter("bandwidth must be positive");
  if (grid_points < 16) throw InvalidParameter("grid too small");
  const double n = double(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= n;
  const double shrink = var > bandwidth * bandwidth ? std::sqrt(1.0 - bandwidth * bandwidth / var) : 0.0;
  std::vector<double> pts(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) pts[i] = mean + shrink * (samples[i] - mean);
  const auto [mn, mx] = std::minmax_element(pts.begin(), pts.end());
  const double lo = *mn - 5.0 * bandwidth, hi = *mx + 5.0 * bandwidth;
  std::vector<double> x(grid_points);
  const double step = (hi - lo) / double(grid_points - 1);
  for (int i = 0; i < grid_points; ++i) x[i] = lo + double(i) * step;
  x.back() = hi;
  std::vector<double> f(grid_points, 0.0);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bandwidth);
  const int reach = int(std::ceil(5.0 * bandwidth / step));
  for (double s : pts) {
    const int c = int(std::lround((s - lo) / step));
    for (int i = std::max(1, c - reach); i <= std::min(grid_points - 2, c + reach); ++i) {
      const double z = (x[i] - s) / bandwidth;
      f[i] += norm * std::exp(-0.5 * z * z);
    }
  }
  normalize(f, step, 1.0);
  return SpectralMeasure(std::move(x), std::move(f));
}

// ---------------------------------------------------------------------------
// Functionals

namespace {

// Antiderivative of u^n log|u|, zero at u = 0.
double xlog_antideriv(int n, double u) {
  if (u == 0.0) return 0.0;
  const double k = n + 1.0;
  return std::pow(u, k) * (std::log(std::abs(u)) / k - 1.0 / (k * k));
}

// K(m) = int B(s) log|m + s| ds, B the autocorrelation of the unit hat.
double hat_log_kernel(int m) {
  // Pieces of B as cubic polynomials in s.
  struct Piece {
    double s0, s1, c[4];
  };
  static const Piece pieces[4] = {
      {-2.0, -1.0, {8.0 / 6.0, 12.0 / 6.0, 1.0, 1.0 / 6.0}},
      {-1.0, 0.0, {2.0 / 3.0, 0.0, -1.0, -0.5}},
      {0.0, 1.0, {2.0 / 3.0, 0.0, -1.0, 0.5}},
      {1.0, 2.0, {8.0 / 6.0, -12.0 / 6.0, 1.0, -1.0 / 6.0}},
  };
  double total = 0.0;
  if (std::abs(m) > 6) {
    const auto& gl = gauss_legendre(16);
    for (const Piece& pc : pieces) {
      const double mid = 0.5 * (pc.s0 + pc.s1), half = 0.5 * (pc.s1 - pc.s0);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double s = mid + half * gl.nodes[i];
        const double b = pc.c[0] + s * (pc.c[1] + s * (pc.c[2] + s * pc.c[3]));
        total += half * gl.weights[i] * b * std::log(std::abs(m + s));
      }
    }
    return total;
  }
  for (const Piece& pc : pieces) {
    // Re-expand P(s) = sum c_i s^i in u = m + s: s = u - m.
    double d[4] = {0, 0, 0, 0};
    const double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j <= i; ++j) d[j] += pc.c[i] * binom[i][j] * std::pow(-double(m), i - j);
    const double u0 = m + pc.s0, u1 = m + pc.s1;
    for (int j = 0; j < 4; ++j) total += d[j] * (xlog_antideriv(j, u1) - xlog_antideriv(j, u0));
  }
  return total;
}

void require_no_atoms(const SpectralMeasure& mu, const char* what) {
  if (!mu.atoms().empty()) throw DivergenceError(std::string(what) + " diverges for a measure with atoms");
  if (!mu.has_density()) throw DivergenceError(std::string(what) + " needs a continuous density");
}

}  // namespace

double log_energy(const SpectralMeasure& mu) {
  require_no_atoms(mu, "log energy");
  const auto [first, last] = mu.active_range();
  const int n = last - first + 1;
  const double h = mu.spacing();
  std::vector<double> K(n);
  for (int m = 0; m < n; ++m) K[m] = hat_log_kernel(m);
  const double* f = mu.density().data() + first;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) mass += f[i];
  mass *= h;
  return mass * mass * std::log(h) + h * h * kernels::toeplitz_quadratic(f, n, K.data());
}

double log_abs_moment(const SpectralMeasure& mu) {
  double s = 0.0;
  for (const Atom& a : mu.atoms()) {
    if (a.location == 0.0) throw DivergenceError("log|x| moment diverges for an atom at 0");
    s += a.mass * std::log(std::abs(a.location));
  }
  if (!mu.has_density()) return s;
  const auto& x = mu.grid();
  const auto& f = mu.density();
  const auto [first, last] = mu.active_range();
  auto A0 = [](double u) { return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u; };
  auto A1 = [](double u) { return u == 0.0 ? 0.0 : 0.5 * u * u * std::log(std::abs(u)) - 0.25 * u * u; };
  auto segment = [&](double a, double b, double fa, double fb) {
    // f linear on [a, b]; integrate (alpha + beta x) log|x|.
    const double beta = (fb - fa) / (b - a), alpha = fa - beta * a;
    return alpha * (A0(b) - A0(a)) + beta * (A1(b) - A1(a));
  };
  for (int j = std::max(first - 1, 0); j < std::min(last + 1, int(x.size()) - 1); ++j) {
    const double a = x[j], b = x[j + 1];
    if (a < 0.0 && b > 0.0) {
      const double f0 = f[j] + (f[j + 1] - f[j]) * (-a) / (b - a);
      s += segment(a, 0.0, f[j], f0) + segment(0.0, b, f0, f[j + 1]);
    } else {
      s += segment(a, b, f[j], f[j + 1]);
    }
  }
  return s;
}

double moment(const SpectralMeasure& mu, int k) {
  if (k < 0) throw InvalidParameter("moment order must be nonnegative");
  double s = 0.0;
  for (const Atom& a : mu.atoms()) s += a.mass * (k == 0 ? 1.0 : std::pow(a.location, k));
  if (!mu.has_density()) return s;
  const auto& x = mu.grid();
  const auto& f = mu.density();
  const auto [first, last] = mu.active_range();
  const auto& gl = gauss_legendre(k / 2 + 2);
  for (int j = std::max(first - 1, 0); j < std::min(last + 1, int(x.size()) - 1); ++j) {
    const double a = x[j], b = x[j + 1], mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double seg = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double t = gl.nodes[i];
      const double xv = mid + half * t;
      const double fv = 0.5 * (f[j] * (1.0 - t) + f[j + 1] * (1.0 + t));
      seg += gl.weights[i] * fv * (k == 0 ? 1.0 : std::pow(xv, k));
    }
    s += half * seg;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Wasserstein-2 by quantile coupling

namespace {

struct QuantilePiece {
  double u0;      // cumulative mass before the piece
  double mass;    // mass of the piece
  double x0, x1;  // location range (equal for atoms)
  double f0, f1;  // density at the ends (unused for atoms)
  bool atom;
};

class Quantile {
 public:
  explicit Quantile(const SpectralMeasure& mu) {
    // Merge grid segments and atoms in increasing location order.
    const auto& x = mu.grid();
    const auto& f = mu.density();
    std::size_t ia = 0;
    const auto& atoms = mu.atoms();
    double u = 0.0;
    auto push_atoms_upto = [&](double loc, bool inclusive) {
      while (ia < atoms.size() && (atoms[ia].location < loc || (inclusive && atoms[ia].location == loc))) {
        pieces_.push_back({u, atoms[ia].mass, atoms[ia].location, atoms[ia].location, 0, 0, true});
        u += atoms[ia].mass;
        ++ia;
      }
    };
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
      double a = x[j], fa = f[j];
      const double b = x[j + 1], fb = f[j + 1];
      // Split the segment at interior atoms.
      while (ia < atoms.size() && atoms[ia].location < b) {
        const double loc = atoms[ia].location;
        if (loc > a) {
          const double fl = f[j] + (fb - f[j]) * (loc - x[j]) / (b - x[j]);
          add_segment(u, a, loc, fa, fl);
          a = loc;
          fa = fl;
        }
        push_atoms_upto(loc, true);
      }
      add_segment(u, a, b, fa, fb);
    }
    push_atoms_upto(std::numeric_limits<double>::infinity(), true);
    total_ = u;
  }

  const std::vector<QuantilePiece>& pieces() const { return pieces_; }
  double total() const { return total_; }

  double operator()(double u) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), u,
                               [](double v, const QuantilePiece& p) { return v < p.u0; });
    if (it != pieces_.begin()) --it;
    const QuantilePiece& p = *it;
    if (p.atom) return p.x0;
    const double m = std::clamp(u - p.u0, 0.0, p.mass);
    const double w = p.x1 - p.x0;
    const double s = (p.f1 - p.f0) / w;
    const double disc = std::max(0.0, p.f0 * p.f0 + 2.0 * s * m);
    const double den = p.f0 + std::sqrt(disc);
    const double t = den > 0.0 ? 2.0 * m / den : 0.0;
    return p.x0 + std::clamp(t, 0.0, w);
  }

 private:
  void add_segment(double& u, double a, double b, double fa, double fb) {
    const double m = 0.5 * (fa + fb) * (b - a);
    if (m <= 0.0) return;
    pieces_.push_back({u, m, a, b, fa, fb, false});
    u += m;
  }

  std::vector<QuantilePiece> pieces_;
  double total_ = 0.0;
};

}  // namespace

double wasserstein2(const SpectralMeasure& mu, const SpectralMeasure& nu) {
  const Quantile qa(mu), qb(nu);
  // Breakpoints in probability where either quantile changes piece. Both CDFs
  // are rescaled to total mass one to absorb rounding.
  std::vector<double> br;
  br.reserve(qa.pieces().size() + qb.pieces().size() + 2);
  for (const auto& p : qa.pieces()) br.push_back(p.u0 / qa.total());
  for (const auto& p : qb.pieces()) br.push_back(p.u0 / qb.total());
  br.push_back(0.0);
  br.push_back(1.0);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  const auto& gl = gauss_legendre(6);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double a = br[i], b = std::min(br[i + 1], 1.0);
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double u = mid + half * gl.nodes[k];
      const double d = qa(u * qa.total()) - qb(u * qb.total());
      s += half * gl.weights[k] * d * d;
    }
  }
  return std::sqrt(std::max(0.0, s));
}

}  // namespace sensing
