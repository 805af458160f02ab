#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "sensing/priors.hpp"

namespace sensing {

struct MCReport {
  std::string experiment;
  int d = 0;
  int L = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  double statistic = 0.0;
  double threshold = 0.0;
  bool passed = false;  // statistic <= threshold
  std::string detail;

  nlohmann::ordered_json to_json() const;
};

// Pooled eigenvalues of S + sqrt(t) GOE(d) against mu0 boxplus sc(t), by W2.
MCReport check_free_convolution(const PriorSpec& prior, double t, int d, int reps, std::uint64_t seed,
                                double threshold = 0.05, int threads = 0);

// GOE prior observed as sqrt(r) S + Z'; the posterior mean sqrt(r) Y' / (1 + r)
// has normalized error 1 / (1 + r). Statistic: relative error of the mean.
MCReport check_goe_denoising(double r, int d, int reps, std::uint64_t seed, double threshold = 0.02, int threads = 0);

enum class SensingEnsemble { Goe, IidRademacher, RankOneCentered };

// KS distance of Tr[Phi S] over n_samples draws of Phi against N(0, 2 tr S^2),
// with S one fixed draw from the prior. Threshold 1.5 times the 1% critical value.
MCReport check_clt_universality(SensingEnsemble ensemble, const PriorSpec& prior, int d, int n_samples,
                                std::uint64_t seed, int threads = 0);

// Pooled symmetrized singular values of S + sqrt(t) Z, Z with i.i.d. entries of
// variance 1/sqrt(dL), L = round(d / beta), against the rectangular convolution.
MCReport check_rect_convolution(const PriorSpec& prior, double t, double beta, int d, int reps, std::uint64_t seed,
                                double threshold = 0.05, int threads = 0);

}  // namespace sensing
