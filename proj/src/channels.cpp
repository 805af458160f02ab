#include "sensing/channels.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <numbers>
#include <tuple>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "sensing/errors.hpp"
#include "sensing/kernels.hpp"
#include "sensing/quadrature.hpp"

namespace sensing {

struct TabulatedActivation::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> f;
};

TabulatedActivation::TabulatedActivation(const std::function<double(double)>& phi, double lo, double hi,
                                         double bound, double lipschitz, std::string name)
    : lo_(lo), hi_(hi), values_(kPoints), bound_(bound), lipschitz_(lipschitz), name_(std::move(name)) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidParameter("activation table needs lo < hi");
  if (!(bound > 0.0) || !(lipschitz > 0.0)) throw InvalidParameter("activation bound and Lipschitz constant must be positive");
  const double step = (hi - lo) / (kPoints - 1);
  for (int i = 0; i < kPoints; ++i) {
    values_[i] = phi(i + 1 == kPoints ? hi : lo + i * step);
    if (!std::isfinite(values_[i])) throw InvalidParameter("activation must be finite");
  }
  spline_ = std::make_shared<const Spline>(
      Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(values_.begin(), values_.end(), lo, step)});
  if (lo == -hi) {
    bool odd = true, even = true;
    for (int i = 0; i < kPoints; ++i) {
      const double a = values_[i], b = values_[kPoints - 1 - i];
      odd = odd && std::abs(a + b) <= 1e-14 * bound;
      even = even && std::abs(a - b) <= 1e-14 * bound;
    }
    parity_ = odd || even;
  }
  // Check the interpolant at nodes and midpoints.
  for (int i = 0; i + 1 < 2 * kPoints; ++i) {
    const double z = std::min(lo + 0.5 * i * step, hi);
    if (std::abs(spline_->f(z)) > bound * (1.0 + 1e-9)) throw InvalidParameter("activation exceeds its declared bound");
    if (std::abs(spline_->f.prime(z)) > lipschitz * (1.0 + 1e-6))
      throw InvalidParameter("activation exceeds its declared Lipschitz constant");
  }
}

double TabulatedActivation::operator()(double z) const {
  if (!(z > lo_)) return values_.front();
  if (!(z < hi_)) return values_.back();
  return spline_->f(z);
}

std::uint64_t TabulatedActivation::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double v) {
    const std::uint64_t b = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (b >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(lo_);
  mix(hi_);
  mix(bound_);
  mix(lipschitz_);
  for (double v : values_) mix(v);
  return h;
}

std::shared_ptr<const TabulatedActivation> tanh_activation() {
  static const auto table = std::make_shared<const TabulatedActivation>(
      [](double z) { return std::tanh(z); }, -8.0, 8.0, 1.0, 1.0, "tanh");
  return table;
}

double ChannelSpec::phi(double z) const {
  switch (activation) {
    case Activation::Linear: return z;
    case Activation::Square: return z * z;
    case Activation::Custom: return (*custom)(z);
  }
  return z;
}

double ChannelSpec::lipschitz_on(double R) const {
  switch (activation) {
    case Activation::Linear: return 1.0;
    case Activation::Square: return 2.0 * R;
    case Activation::Custom: return custom->lipschitz();
  }
  return 1.0;
}

bool ChannelSpec::has_parity() const {
  return activation != Activation::Custom || (custom && custom->has_parity());
}

void ChannelSpec::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidParameter("channel noise delta must be nonnegative");
  if (activation == Activation::Custom && !custom) throw InvalidParameter("custom activation needs a table");
}

std::string ChannelSpec::key() const {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, delta);
  std::string k(buf, r.ptr);
  k += '|' + std::to_string(int(activation)) + '|' + std::to_string(int(randomness));
  if (activation == Activation::Custom && custom) k += '|' + std::to_string(custom->fingerprint());
  return k;
}

void QuadratureSpec::validate() const {
  if (hermite_order < 8 || inner_order < 8) throw InvalidParameter("quadrature orders must be at least 8");
}

double pout_density(const ChannelSpec& ch, double y, double z) {
  ch.validate();
  if (!(ch.delta > 0.0)) throw DegenerateChannel("P_out has no density when delta = 0");
  const double p = ch.phi(z);
  double mean = p, var = ch.delta;
  if (ch.randomness == ChannelRandomness::NormalMultiplier) {
    mean = 0.0;
    var += p * p;
  }
  const double d = y - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

namespace {

// Product weights below this are dropped from the outer tensor rule.
constexpr double kPruneWeight = 1e-17;
// Inner terms below exp(-kWindowDecay) times the largest one are skipped.
constexpr double kWindowDecay = 40.0;
// Half-width of the Gaussian-weighted trapezoid rules, in standard deviations.
constexpr double kOuterRange = 8.5;
constexpr double kInnerRange = 10.0;
constexpr int kMaxInnerNodes = 8001;

// Outer rule over each Gaussian dimension.
const QuadratureRule& outer_rule(int n) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gaussian_trapezoid(n, kOuterRange)).first;
  return it->second;
}

struct InnerRule {
  std::vector<double> x, logw;
};

// The spacing also resolves the narrowest peak of w -> P_out(y | a + s w), whose
// width is about sqrt(delta) / (s Lip(phi)).
InnerRule make_inner_rule(const ChannelSpec& ch, double a_max, double s_max, const QuadratureSpec& quad) {
  const double L = ch.lipschitz_on(a_max + 4.0 * s_max);
  double h = 2.0 * kInnerRange / (quad.inner_order - 1);
  if (s_max > 0.0) h = std::min(h, 0.8 * std::sqrt(ch.delta) / (s_max * L));
  const int n = std::min(kMaxInnerNodes, 2 * int(std::ceil(kInnerRange / h)) + 1);
  const QuadratureRule rule = gaussian_trapezoid(n, kInnerRange);
  InnerRule inner;
  inner.x = rule.nodes;
  for (double w : rule.weights) inner.logw.push_back(std::log(std::max(w, 1e-300)));
  return inner;
}

}  // namespace

struct ChannelPotential::Impl {
  InnerRule inner;
  std::mutex mu;
  std::map<double, double> values;
};

ChannelPotential::ChannelPotential(const ChannelSpec& ch, double rho, const QuadratureSpec& quad, bool rectangular)
    : ch_(ch), rho_(rho), quad_(quad), rectangular_(rectangular), impl_(std::make_unique<Impl>()) {
  const double c = rectangular ? 1.0 : 2.0;
  const auto& gh = outer_rule(quad.hermite_order);
  double vmax = 0.0, wmax = *std::max_element(gh.weights.begin(), gh.weights.end());
  for (size_t i = 0; i < gh.nodes.size(); ++i)
    if (gh.weights[i] * wmax * wmax >= kPruneWeight) vmax = std::max(vmax, std::abs(gh.nodes[i]));
  impl_->inner = make_inner_rule(ch, std::sqrt(c * rho) * vmax, std::sqrt(c * rho), quad);
}

ChannelPotential::~ChannelPotential() = default;

std::shared_ptr<const ChannelPotential> ChannelPotential::get(const ChannelSpec& ch, double rho,
                                                              const QuadratureSpec& quad, bool rectangular) {
  ch.validate();
  quad.validate();
  if (!(ch.delta > 0.0)) throw DegenerateChannel("channel potential needs delta > 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidParameter("rho must be positive");
  using Key = std::tuple<std::string, double, int, int, bool>;
  static std::mutex guard;
  static std::map<Key, std::shared_ptr<const ChannelPotential>> registry;
  const Key key{ch.key(), rho, quad.hermite_order, quad.inner_order, rectangular};
  {
    std::lock_guard<std::mutex> lock(guard);
    auto it = registry.find(key);
    if (it != registry.end()) return it->second;
  }
  std::shared_ptr<const ChannelPotential> p(new ChannelPotential(ch, rho, quad, rectangular));
  std::lock_guard<std::mutex> lock(guard);
  if (registry.size() > 256) registry.clear();
  return registry.emplace(key, p).first->second;
}

double ChannelPotential::compute(double q) const {
  const double c = rectangular_ ? 1.0 : 2.0;
  const double a_scale = std::sqrt(c * q), s = std::sqrt(c * std::max(rho_ - q, 0.0));
  const auto& gh = outer_rule(quad_.hermite_order);
  const auto& x = gh.nodes;
  const auto& w = gh.weights;
  const int n = int(x.size());
  const double wmax = *std::max_element(w.begin(), w.end());
  const bool multiplier = ch_.randomness == ChannelRandomness::NormalMultiplier;
  const InnerRule& inner = impl_->inner;
  const int ni = int(inner.x.size());
  std::vector<double> cc(ni), mm(ni), pp(ni), scratch(ni), cs(ni), ms(ni), ys, wy, out;
  std::vector<int> order(ni);
  ys.reserve(size_t(n) * n);
  wy.reserve(size_t(n) * n);

  // With odd or even phi the nodes V and -V contribute equally; the outer rule is symmetric.
  const bool fold = ch_.has_parity();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (fold && x[i] < 0.0) continue;
    // With q = 0 every V node gives the same value.
    double wi = a_scale == 0.0 ? 1.0 : w[i];
    if (a_scale != 0.0 && wi * wmax * wmax < kPruneWeight) continue;
    if (a_scale != 0.0 && fold && x[i] > 0.0) wi *= 2.0;
    const double aV = a_scale == 0.0 ? 0.0 : a_scale * x[i];
    for (int l = 0; l < ni; ++l) {
      const double p = ch_.phi(aV + s * inner.x[l]);
      const double var = multiplier ? ch_.delta + p * p : ch_.delta;
      mm[l] = multiplier ? 0.0 : p;
      pp[l] = 0.5 / var;
      cc[l] = inner.logw[l] - 0.5 * std::log(2.0 * std::numbers::pi * var);
    }
    ys.clear();
    wy.clear();
    for (int j = 0; j < n; ++j) {
      if (w[i] * w[j] * wmax < kPruneWeight) continue;
      const double p = ch_.phi(aV + s * x[j]);
      const double mean = multiplier ? 0.0 : p;
      const double sd = std::sqrt(multiplier ? ch_.delta + p * p : ch_.delta);
      for (int k = 0; k < n; ++k) {
        if (w[i] * w[j] * w[k] < kPruneWeight) continue;
        ys.push_back(mean + sd * x[k]);
        wy.push_back(w[j] * w[k]);
      }
    }
    out.resize(ys.size());
    if (multiplier) {
      kernels::log_mixture(cc.data(), mm.data(), pp.data(), ni, ys.data(), int(ys.size()), out.data(),
                           scratch.data());
    } else {
      // Sort the inner nodes by mean and keep, for each y, only those within
      // exp(-kWindowDecay) of the nearest one after accounting for the weight spread.
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return mm[a] < mm[b]; });
      for (int l = 0; l < ni; ++l) cs[l] = cc[order[l]], ms[l] = mm[order[l]];
      const double spread = *std::max_element(cs.begin(), cs.end()) - *std::min_element(cs.begin(), cs.end());
      const double reach = 2.0 * ch_.delta * (kWindowDecay + spread);
      for (size_t k = 0; k < ys.size(); ++k) {
        const double y = ys[k];
        const auto it = std::lower_bound(ms.begin(), ms.end(), y);
        double dmin = INFINITY;
        if (it != ms.end()) dmin = *it - y;
        if (it != ms.begin()) dmin = std::min(dmin, y - *(it - 1));
        const double win = std::sqrt(dmin * dmin + reach);
        const int lo = int(std::lower_bound(ms.begin(), ms.end(), y - win) - ms.begin());
        const int hi = int(std::upper_bound(ms.begin(), ms.end(), y + win) - ms.begin());
        kernels::log_mixture(cs.data() + lo, ms.data() + lo, pp.data(), hi - lo, &ys[k], 1, &out[k],
                             scratch.data());
      }
    }
    double acc = 0.0;
    for (size_t k = 0; k < ys.size(); ++k) acc += wy[k] * out[k];
    total += wi * acc;
    if (a_scale == 0.0) break;
  }
  return total;
}

double ChannelPotential::value(double q) const {
  if (!(q >= 0.0 && q <= rho_)) throw DomainError("channel potential needs q in [0, rho]");
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->values.find(q);
    if (it != impl_->values.end()) return it->second;
  }
  const double v = compute(q);
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->values.emplace(q, v);
  return v;
}

double ChannelPotential::derivative(double q) const {
  if (!(q >= 0.0 && q <= rho_)) throw DomainError("channel potential needs q in [0, rho]");
  const double h = 1e-5 * rho_;
  double d;
  if (q - h < 0.0)
    d = (-3.0 * value(q) + 4.0 * value(q + h) - value(q + 2.0 * h)) / (2.0 * h);
  else if (q + h > rho_)
    d = (3.0 * value(q) - 4.0 * value(q - h) + value(q - 2.0 * h)) / (2.0 * h);
  else
    d = (value(q + h) - value(q - h)) / (2.0 * h);
  return std::max(d, 0.0);
}

double psi_out(const ChannelSpec& ch, double q, double rho, const QuadratureSpec& quad) {
  return ChannelPotential::get(ch, rho, quad, false)->value(q);
}
double psi_out_prime(const ChannelSpec& ch, double q, double rho, const QuadratureSpec& quad) {
  return ChannelPotential::get(ch, rho, quad, false)->derivative(q);
}
double psi_out_rec(const ChannelSpec& ch, double q, double rho, const QuadratureSpec& quad) {
  return ChannelPotential::get(ch, rho, quad, true)->value(q);
}
double psi_out_rec_prime(const ChannelSpec& ch, double q, double rho, const QuadratureSpec& quad) {
  return ChannelPotential::get(ch, rho, quad, true)->derivative(q);
}

}  // namespace sensing
