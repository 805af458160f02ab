#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sensing/channels.hpp"
#include "sensing/priors.hpp"

namespace sensing {

struct RSState {
  double q;
  double r;
};

struct Branch {
  double q;
  double value;
};

struct SolveResult {
  double q_star = 0.0;
  double r_star = 0.0;
  double f_limit = 0.0;
  double mutual_info = 0.0;
  double mmse_tensor = 0.0;
  std::optional<double> mmse_psd;
  std::vector<Branch> branches;  // local maximizers, ascending in q
  bool converged = true;
  bool degenerate = false;
  double inner_residual = 0.0;  // |psi'(r*) + (rho - q*)/k|
  double outer_residual = 0.0;  // |r* - k alpha Psi'(q*)|
  std::string diagnostic;
};

struct SolverOptions {
  int grid_size = 257;
  double q_tolerance = 1e-10;
  double tie_tolerance = 1e-9;
  QuadratureSpec quadrature;
};

// f_RS(q, r) = psi_P0(r) + alpha Psi_out(q) + (r (rho - q) + 1) / 4, with r = 0
// read as the limit r -> 0+.
double f_rs(const PriorSpec& prior, const ChannelSpec& ch, double alpha, RSState state,
            const QuadratureSpec& quad = {});
// f_rec(q, r) = psi_rec(r) + alpha Psi_rec(q) + r (rho - q) / 2.
double f_rs_rec(const PriorSpec& prior, const ChannelSpec& ch, double alpha, RSState state,
                const QuadratureSpec& quad = {});

// Inner minimization over r in [0, r_max] by bisection on psi'(r) = -(rho - q)/k.
// Returns (r, value).
std::pair<double, double> inf_r(const PriorSpec& prior, const ChannelSpec& ch, double alpha, double q,
                                const QuadratureSpec& quad = {});
std::pair<double, double> inf_r_rec(const PriorSpec& prior, const ChannelSpec& ch, double alpha, double q,
                                    const QuadratureSpec& quad = {});

SolveResult solve(const PriorSpec& prior, const ChannelSpec& ch, double alpha, const SolverOptions& opts = {});
// Rectangular model; prior.beta is replaced by `beta`.
SolveResult solve_rec(const PriorSpec& prior, const ChannelSpec& ch, double alpha, double beta,
                      const SolverOptions& opts = {});

enum class Model { Symmetric, Rectangular };

struct SweepEntry {
  double alpha;
  std::optional<SolveResult> result;
  std::string error;
};

// One independent solve per alpha, run in parallel. Errors are recorded per entry.
std::vector<SweepEntry> sweep(const PriorSpec& prior, const ChannelSpec& ch, const std::vector<double>& alphas,
                              Model model, const SolverOptions& opts = {}, int threads = 0);

// Spiked-tensor potential
// -lambda (p-1) q^p / 2 + psi_P0(2 p lambda q^(p-1)) + 1/4 + p lambda rho q^(p-1) / 2.
double f_rs_spike(const PriorSpec& prior, double q, double lambda, int p);

struct SpikeResult {
  double q_star;
  double f_limit;
};

// Maximizer of f_rs_spike over [0, rho]; ties go to the smallest q. The
// interpolation sum rule bounds the free entropy below by f_rs_spike(q) for
// every q, so the limit is the supremum.
SpikeResult solve_spike(const PriorSpec& prior, double lambda, int p, int grid_size = 257);

}  // namespace sensing
