#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace sensing {

enum class Activation { Linear, Square, Custom };
enum class ChannelRandomness { None, NormalMultiplier };

// An activation tabulated on a uniform grid, interpolated by a cubic B-spline
// and extended by constants outside it. The declared bound and Lipschitz
// constant are checked against the interpolant.
class TabulatedActivation {
 public:
  static constexpr int kPoints = 2048;

  TabulatedActivation(const std::function<double(double)>& phi, double lo, double hi, double bound,
                      double lipschitz, std::string name = "custom");

  double operator()(double z) const;
  double bound() const { return bound_; }
  double lipschitz() const { return lipschitz_; }
  const std::string& name() const { return name_; }
  std::uint64_t fingerprint() const;
  // True when the table is odd or even about 0.
  bool has_parity() const { return parity_; }

 private:
  struct Spline;
  double lo_, hi_;
  std::vector<double> values_;
  std::shared_ptr<const Spline> spline_;
  double bound_, lipschitz_;
  std::string name_;
  bool parity_ = false;
};

// tanh on [-8, 8], bound 1, Lipschitz 1.
std::shared_ptr<const TabulatedActivation> tanh_activation();

// Y = phi(Z, A) + sqrt(delta) N(0, 1). With the normal multiplier, phi(z, a) = a phi(z).
struct ChannelSpec {
  Activation activation = Activation::Linear;
  double delta = 1.0;
  ChannelRandomness randomness = ChannelRandomness::None;
  std::shared_ptr<const TabulatedActivation> custom;

  double phi(double z) const;
  // Lipschitz constant of phi on [-R, R].
  double lipschitz_on(double R) const;
  // phi odd or even, so that the channel potential is symmetric under z -> -z.
  bool has_parity() const;
  void validate() const;
  // Exact text identity, used as a cache key.
  std::string key() const;
};

enum class YIntegration { NoiseHermite };

struct QuadratureSpec {
  int hermite_order = 61;  // per outer Gaussian dimension (V, W, channel noise)
  int inner_order = 121;   // Gauss-Hermite nodes for the w-integral
  YIntegration y_integration = YIntegration::NoiseHermite;

  void validate() const;
};

double pout_density(const ChannelSpec& ch, double y, double z);

// Psi_out(q) = E log int Dw P_out(Y | sqrt(2q) V + sqrt(2(rho - q)) w).
double psi_out(const ChannelSpec& ch, double q, double rho, const QuadratureSpec& quad = {});
double psi_out_prime(const ChannelSpec& ch, double q, double rho, const QuadratureSpec& quad = {});
// Rectangular normalization: sqrt(q) V + sqrt(rho - q) w.
double psi_out_rec(const ChannelSpec& ch, double q, double rho, const QuadratureSpec& quad = {});
double psi_out_rec_prime(const ChannelSpec& ch, double q, double rho, const QuadratureSpec& quad = {});

// Channel potential bound to (channel, rho, quadrature, normalization), with memoized values.
class ChannelPotential {
 public:
  static std::shared_ptr<const ChannelPotential> get(const ChannelSpec& ch, double rho, const QuadratureSpec& quad,
                                                     bool rectangular);
  ~ChannelPotential();

  double value(double q) const;       // q in [0, rho]
  double derivative(double q) const;  // step 1e-5 rho, one-sided at the ends, clamped to >= 0
  double rho() const { return rho_; }
  bool rectangular() const { return rectangular_; }
  const ChannelSpec& channel() const { return ch_; }

 private:
  ChannelPotential(const ChannelSpec& ch, double rho, const QuadratureSpec& quad, bool rectangular);
  double compute(double q) const;

  struct Impl;
  ChannelSpec ch_;
  double rho_;
  QuadratureSpec quad_;
  bool rectangular_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sensing
