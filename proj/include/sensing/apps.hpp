#pragma once

#include "sensing/channels.hpp"
#include "sensing/priors.hpp"
#include "sensing/solver.hpp"

namespace sensing {

// One-hidden-layer quadratic network with width ratio kappa = m/d.
struct NNProblem {
  double kappa;
  double delta;   // pre-activation noise, >= 0
  double delta0;  // post-activation noise, > 0
  double alpha;   // n / d^2

  void validate() const;
};

// Effective linear-channel noise 2 delta (2 + delta) / kappa + delta0.
double nn_effective_noise(const NNProblem& p);

struct NNResult {
  double q_star;
  double mmse_gen;  // kappa (rho - q*)
  SolveResult solve;
};

NNResult nn_generalization_mmse(const NNProblem& p, const SolverOptions& opts = {});

// Bilinear sequence regression with S = U V normalized to rho = 1.
struct BSRProblem {
  double beta;        // d / L in (0, 1]
  double rank_ratio;  // inner rank over sqrt(dL)
  ChannelSpec channel;
  double alpha;       // n / (L d)
  ProductSampling sampling;

  void validate() const;
};

struct BSRResult {
  double q_star;
  double mmse_tensor;
  SolveResult solve;
};

BSRResult bsr_mmse(const BSRProblem& p, const SolverOptions& opts = {});

}  // namespace sensing
