#include "sensing/apps.hpp"

#include <cmath>

#include "sensing/errors.hpp"

namespace sensing {

void NNProblem::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidParameter("kappa must be positive");
  if (kappa == 1.0) throw UnsupportedParameter("kappa = 1 is unsupported for the Wishart prior");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidParameter("delta must be nonnegative");
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw InvalidParameter("delta0 must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("alpha must be positive");
}

double nn_effective_noise(const NNProblem& p) { return 2.0 * p.delta * (2.0 + p.delta) / p.kappa + p.delta0; }

NNResult nn_generalization_mmse(const NNProblem& p, const SolverOptions& opts) {
  p.validate();
  const PriorSpec prior = wishart_prior(p.kappa);
  ChannelSpec ch;
  ch.delta = nn_effective_noise(p);
  SolveResult r = solve(prior, ch, p.alpha, opts);
  const double q = r.q_star;
  return {q, p.kappa * (prior.rho - q), std::move(r)};
}

void BSRProblem::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in (0, 1]");
  if (!(rank_ratio > 0.0) || !std::isfinite(rank_ratio)) throw InvalidParameter("rank_ratio must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("alpha must be positive");
  channel.validate();
}

BSRResult bsr_mmse(const BSRProblem& p, const SolverOptions& opts) {
  p.validate();
  const PriorSpec prior = rect_product_prior(p.beta, p.rank_ratio, p.sampling);
  SolveResult r = solve_rec(prior, p.channel, p.alpha, p.beta, opts);
  const double q = r.q_star, m = r.mmse_tensor;
  return {q, m, std::move(r)};
}

}  // namespace sensing
