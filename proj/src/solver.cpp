#include "sensing/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/tools/toms748_solve.hpp>

#include "sensing/errors.hpp"
#include "sensing/freeconv.hpp"
#include "sensing/parallel.hpp"

namespace sensing {

namespace {

// Below this r the denoising potential is continued from its r -> 0+ slope.
constexpr double kSmallR = 1e-6;
// Nodes per decade of the lazily built psi' table used to locate branches.
constexpr int kTablePerDecade = 8;

class Denoiser {
 public:
  explicit Denoiser(std::shared_ptr<const DenoisingPotential> pot) : pot_(std::move(pot)) {}

  double value(double r) const {
    if (r <= 0.0) return pot_->limit_value();
    if (r >= kSmallR) return pot_->value(r);
    const double s0 = pot_->limit_slope(), s1 = pot_->derivative(kSmallR);
    return pot_->value(kSmallR) - s0 * (kSmallR - r) - (s1 - s0) * (kSmallR * kSmallR - r * r) / (2.0 * kSmallR);
  }

  double derivative(double r) const {
    const double s0 = pot_->limit_slope();
    if (r <= 0.0) return s0;
    if (r >= kSmallR) return pot_->derivative(r);
    return s0 + (pot_->derivative(kSmallR) - s0) * r / kSmallR;
  }

  // Interpolated psi' from exact values at r = 10^(j / kTablePerDecade).
  double derivative_estimate(double r) const {
    if (r < kSmallR) return derivative(r);
    const double s = kTablePerDecade * std::log10(r);
    const double j0 = std::floor(s), w = s - j0;
    const double a = node(long(j0)), b = node(long(j0) + 1);
    return (1.0 - w) * a + w * b;
  }

  const DenoisingPotential& potential() const { return *pot_; }

 private:
  double node(long j) const {
    {
      std::lock_guard<std::mutex> lock(table_->mu);
      auto it = table_->values.find(j);
      if (it != table_->values.end()) return it->second;
    }
    const double v = derivative(std::pow(10.0, double(j) / kTablePerDecade));
    std::lock_guard<std::mutex> lock(table_->mu);
    return table_->values.emplace(j, v).first->second;
  }

  struct Table {
    std::mutex mu;
    std::map<long, double> values;
  };
  // Shared per live potential; an entry whose potential has expired is rebuilt,
  // so a reused address never sees a stale table.
  static std::shared_ptr<Table> table_for(const std::shared_ptr<const DenoisingPotential>& p) {
    static std::mutex guard;
    static std::map<const DenoisingPotential*, std::pair<std::weak_ptr<const DenoisingPotential>, std::shared_ptr<Table>>>
        tables;
    std::lock_guard<std::mutex> lock(guard);
    auto& [owner, t] = tables[p.get()];
    if (!t || owner.lock() != p) {
      owner = p;
      t = std::make_shared<Table>();
    }
    return t;
  }

  std::shared_ptr<const DenoisingPotential> pot_;
  std::shared_ptr<Table> table_ = table_for(pot_);
};

// The scalar sup-inf problem with coupling k (4 symmetric, 2 rectangular).
struct Problem {
  Denoiser den;
  std::shared_ptr<const ChannelPotential> out;
  double alpha, rho, k, offset;

  double clamp_q(double q) const { return std::clamp(q, 0.0, rho); }
  double f(double q, double r) const { return den.value(r) + alpha * out->value(clamp_q(q)) + r * (rho - q) / k + offset; }
  double r_of(double q) const { return k * alpha * out->derivative(clamp_q(q)); }
  // Same sign as d/dq inf_r f: positive below a local maximizer.
  double h(double q) const { return rho + k * den.derivative(r_of(q)) - q; }
  double h_estimate(double q) const { return rho + k * den.derivative_estimate(r_of(q)) - q; }

  std::pair<double, double> inner(double q) const {
    if (q < 0.0 || q > rho) throw DomainError("overlap q outside [0, rho]");
    const double target = -(rho - q) / k;
    auto slope = [&](double r) { return den.derivative(r) - target; };
    const double rmax = r_of(rho);
    double r;
    // The r -> 0+ slope equals the target exactly for centred priors, up to rounding in rho.
    if (slope(0.0) >= -1e-12 || rmax <= 0.0) {
      r = 0.0;
    } else if (slope(rmax) <= 0.0) {
      r = rmax;
    } else {
      double lo = 0.0, hi = rmax;
      for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) < 0.0 ? lo : hi) = mid;
      }
      if (hi - lo > 1e-10 * (1.0 + hi)) throw ConvergenceError("inner bisection did not converge", hi - lo);
      r = 0.5 * (lo + hi);
    }
    return {r, f(q, r)};
  }
};

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("alpha must be positive");
}

Problem symmetric_problem(const PriorSpec& prior, const ChannelSpec& ch, double alpha, const QuadratureSpec& quad) {
  if (prior.rectangular) throw InvalidParameter("symmetric model needs a symmetric prior");
  ch.validate();
  quad.validate();
  return Problem{Denoiser(DenoisingPotential::symmetric(prior.limiting_measure)),
                 ChannelPotential::get(ch, prior.rho, quad, false), alpha, prior.rho, 4.0, 0.25};
}

Problem rectangular_problem(const PriorSpec& prior, const ChannelSpec& ch, double alpha, double beta,
                            const QuadratureSpec& quad) {
  if (!prior.rectangular) throw InvalidParameter("rectangular model needs a rectangular prior");
  ch.validate();
  quad.validate();
  auto pot = DenoisingPotential::rectangular(prior.limiting_measure, beta);
  const double rho = beta == prior.beta ? prior.rho : pot->rho();
  return Problem{Denoiser(std::move(pot)), ChannelPotential::get(ch, rho, quad, true), alpha, rho, 2.0, 0.0};
}

SolveResult run(const Problem& P, const SolverOptions& opts, bool psd) {
  if (opts.grid_size < 3) throw InvalidParameter("grid_size must be at least 3");
  if (!(opts.q_tolerance > 0.0)) throw InvalidParameter("q_tolerance must be positive");
  const int n = opts.grid_size;
  const double rho = P.rho;
  std::vector<double> q(n), est(n);
  for (int i = 0; i < n; ++i) q[i] = rho * double(i) / double(n - 1);
  q.back() = rho;
  for (int i = 0; i < n; ++i) est[i] = P.h_estimate(q[i]);

  SolveResult res;
  const double h0 = P.h(0.0);
  struct Candidate {
    double q, r;
  };
  std::vector<Candidate> cands;
  if (h0 < 0.0 || (h0 == 0.0 && est[1] <= 0.0)) cands.push_back({0.0, P.inner(0.0).first});

  // Brackets [a, b] with h(a) > 0 >= h(b), first from the estimate, then checked exactly.
  std::vector<std::pair<int, int>> brackets;
  for (int i = 0; i + 1 < n; ++i)
    if (est[i] > 0.0 && est[i + 1] <= 0.0) brackets.push_back({i, i + 1});
  if (brackets.empty() && h0 > 0.0) brackets.push_back({0, n - 1});

  double last_root = -1.0;
  for (auto [ia, ib] : brackets) {
    double ha = P.h(q[ia]), hb = P.h(q[ib]);
    while (ha <= 0.0 && ia > 0) ha = P.h(q[--ia]);
    while (hb > 0.0 && ib < n - 1) hb = P.h(q[++ib]);
    if (!(ha > 0.0 && hb <= 0.0)) {
      res.diagnostic += "unconfirmed bracket near q=" + std::to_string(q[ia]) + "; ";
      continue;
    }
    double root;
    if (hb == 0.0) {
      root = q[ib];
    } else {
      std::uintmax_t iters = 200;
      const double tol = opts.q_tolerance;
      const auto [a, b] = boost::math::tools::toms748_solve([&](double x) { return P.h(x); }, q[ia], q[ib], ha, hb,
                                                            [tol](double x, double y) { return std::abs(y - x) <= tol; },
                                                            iters);
      if (std::abs(b - a) > tol) {
        res.converged = false;
        res.diagnostic += "root polish hit the iteration cap; ";
      }
      root = 0.5 * (a + b);
    }
    if (std::abs(root - last_root) <= 10.0 * opts.q_tolerance) continue;
    last_root = root;
    cands.push_back({root, P.r_of(root)});
  }
  if (cands.empty()) {
    // No bracket confirmed: fall back to the best grid point.
    res.converged = false;
    res.diagnostic += "no stationary point bracketed; grid optimum retained; ";
    double best = -INFINITY;
    int bi = 0;
    for (int i = 0; i < n; ++i) {
      const double v = P.inner(q[i]).second;
      if (v > best) best = v, bi = i;
    }
    cands.push_back({q[bi], P.inner(q[bi]).first});
  }

  for (const auto& c : cands) res.branches.push_back({c.q, P.f(c.q, c.r)});
  std::size_t top = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (res.branches[i].value > res.branches[top].value + opts.tie_tolerance) top = i;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (i != top && std::abs(res.branches[i].value - res.branches[top].value) <= opts.tie_tolerance) {
      res.degenerate = true;
      if (cands[i].q < cands[top].q) top = i;
    }

  res.q_star = cands[top].q;
  res.r_star = cands[top].r;
  res.f_limit = res.branches[top].value;
  res.mutual_info = -res.f_limit + P.alpha * P.out->value(rho);
  res.mmse_tensor = std::clamp(rho * rho - res.q_star * res.q_star, 0.0, rho * rho);
  if (psd) res.mmse_psd = rho - res.q_star;
  res.outer_residual = std::abs(res.r_star - P.r_of(res.q_star));
  res.inner_residual = std::abs(P.den.derivative(res.r_star) + (rho - res.q_star) / P.k);
  if (res.q_star == 0.0) {
    // Boundary maximizer: KKT requires the slope of inf_r f to be non-positive.
    res.inner_residual = 0.0;
    res.outer_residual = 0.0;
  } else if (res.inner_residual > 1e-7 || res.outer_residual > 1e-6 * (1.0 + res.r_star)) {
    res.converged = false;
    res.diagnostic += "stationarity residual above tolerance; ";
  }
  return res;
}

}  // namespace

double f_rs(const PriorSpec& prior, const ChannelSpec& ch, double alpha, RSState s, const QuadratureSpec& quad) {
  const Problem P = symmetric_problem(prior, ch, alpha, quad);
  if (s.q < 0.0 || s.q > P.rho) throw DomainError("overlap q outside [0, rho]");
  if (s.r < 0.0) throw DomainError("r must be nonnegative");
  return P.f(s.q, s.r);
}

double f_rs_rec(const PriorSpec& prior, const ChannelSpec& ch, double alpha, RSState s, const QuadratureSpec& quad) {
  const Problem P = rectangular_problem(prior, ch, alpha, prior.beta, quad);
  if (s.q < 0.0 || s.q > P.rho) throw DomainError("overlap q outside [0, rho]");
  if (s.r < 0.0) throw DomainError("r must be nonnegative");
  return P.f(s.q, s.r);
}

std::pair<double, double> inf_r(const PriorSpec& prior, const ChannelSpec& ch, double alpha, double q,
                                const QuadratureSpec& quad) {
  check_alpha(alpha);
  return symmetric_problem(prior, ch, alpha, quad).inner(q);
}

std::pair<double, double> inf_r_rec(const PriorSpec& prior, const ChannelSpec& ch, double alpha, double q,
                                    const QuadratureSpec& quad) {
  check_alpha(alpha);
  return rectangular_problem(prior, ch, alpha, prior.beta, quad).inner(q);
}

SolveResult solve(const PriorSpec& prior, const ChannelSpec& ch, double alpha, const SolverOptions& opts) {
  check_alpha(alpha);
  return run(symmetric_problem(prior, ch, alpha, opts.quadrature), opts, prior.psd);
}

SolveResult solve_rec(const PriorSpec& prior, const ChannelSpec& ch, double alpha, double beta,
                      const SolverOptions& opts) {
  check_alpha(alpha);
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in (0, 1]");
  return run(rectangular_problem(prior, ch, alpha, beta, opts.quadrature), opts, prior.psd);
}

std::vector<SweepEntry> sweep(const PriorSpec& prior, const ChannelSpec& ch, const std::vector<double>& alphas,
                              Model model, const SolverOptions& opts, int threads) {
  std::vector<SweepEntry> out(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) out[i].alpha = alphas[i];
  parallel_for(alphas.size(), threads, [&](std::size_t i) {
    try {
      out[i].result = model == Model::Symmetric ? solve(prior, ch, alphas[i], opts)
                                                : solve_rec(prior, ch, alphas[i], prior.beta, opts);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

double f_rs_spike(const PriorSpec& prior, double q, double lambda, int p) {
  if (prior.rectangular) throw InvalidParameter("spiked model needs a symmetric prior");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be nonnegative");
  if (p < 2) throw InvalidParameter("tensor order p must be at least 2");
  if (q < 0.0 || q > prior.rho) throw DomainError("overlap q outside [0, rho]");
  const Denoiser den(DenoisingPotential::symmetric(prior.limiting_measure));
  const double qp1 = std::pow(q, p - 1);
  return -0.5 * lambda * (p - 1) * qp1 * q + den.value(2.0 * p * lambda * qp1) + 0.25 +
         0.5 * p * lambda * prior.rho * qp1;
}

SpikeResult solve_spike(const PriorSpec& prior, double lambda, int p, int grid_size) {
  if (grid_size < 3) throw InvalidParameter("grid_size must be at least 3");
  const double rho = prior.rho;
  const int n = grid_size;
  auto f = [&](double q) { return f_rs_spike(prior, q, lambda, p); };
  std::vector<double> q(n), v(n);
  for (int i = 0; i < n; ++i) {
    q[i] = i + 1 == n ? rho : rho * double(i) / double(n - 1);
    v[i] = f(q[i]);
  }
  int bi = 0;
  for (int i = 1; i < n; ++i)
    if (v[i] > v[bi] + 1e-12) bi = i;
  SpikeResult best{q[bi], v[bi]};
  // Golden-section refinement inside the neighbouring cells.
  double a = q[std::max(bi - 1, 0)], b = q[std::min(bi + 1, n - 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-10) {
    if (f1 >= f2) {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  const double qm = 0.5 * (a + b), fm = f(qm);
  if (fm > best.f_limit + 1e-12) best = {qm, fm};
  return best;
}

}  // namespace sensing
