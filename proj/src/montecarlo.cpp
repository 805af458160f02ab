#include "sensing/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sensing/errors.hpp"
#include "sensing/freeconv.hpp"
#include "sensing/linalg.hpp"
#include "sensing/parallel.hpp"
#include "sensing/random.hpp"

namespace sensing {

namespace {

MCReport report(std::string name, int d, int L, int reps, std::uint64_t seed, double stat, double threshold) {
  MCReport r;
  r.experiment = std::move(name);
  r.d = d;
  r.L = L;
  r.reps = reps;
  r.seed = seed;
  r.statistic = stat;
  r.threshold = threshold;
  r.passed = stat <= threshold;
  return r;
}

void check_sizes(int d, int reps, int min_d) {
  if (d < min_d) throw InvalidParameter("dimension d must be at least " + std::to_string(min_d));
  if (reps < 1) throw InvalidParameter("reps must be at least 1");
}

// Per-repetition values concatenated in repetition order.
std::vector<double> pooled(int reps, int threads, const std::function<std::vector<double>(int)>& draw) {
  std::vector<std::vector<double>> parts(reps);
  parallel_for(std::size_t(reps), threads, [&](std::size_t i) { parts[i] = draw(int(i)); });
  std::vector<double> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

nlohmann::ordered_json MCReport::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["d"] = d;
  j["L"] = L;
  j["reps"] = reps;
  j["seed"] = seed;
  j["statistic"] = statistic;
  j["threshold"] = threshold;
  j["passed"] = passed;
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

MCReport check_free_convolution(const PriorSpec& prior, double t, int d, int reps, std::uint64_t seed,
                                double threshold, int threads) {
  if (prior.rectangular) throw InvalidParameter("free convolution check needs a symmetric prior");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("noise scale t must be nonnegative");
  check_sizes(d, reps, 200);
  const PriorSpec noise = goe_prior();
  const auto ev = pooled(reps, threads, [&](int rep) {
    Eigen::MatrixXd m = sample_matrix(prior, d, d, derive_seed(seed, 2 * std::uint64_t(rep)));
    if (t > 0.0) m += std::sqrt(t) * sample_matrix(noise, d, d, derive_seed(seed, 2 * std::uint64_t(rep) + 1));
    return symmetric_eigenvalues(std::move(m));
  });
  const SpectralMeasure target = t > 0.0 ? semicircle_convolve(prior.limiting_measure, t).measure : prior.limiting_measure;
  MCReport r = report("free_convolution", d, d, reps, seed, wasserstein2(SpectralMeasure::empirical(ev), target), threshold);
  r.detail = prior.name() + ", t=" + fmt(t);
  return r;
}

MCReport check_goe_denoising(double r, int d, int reps, std::uint64_t seed, double threshold, int threads) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidParameter("snr r must be nonnegative");
  check_sizes(d, reps, 200);
  const PriorSpec goe = goe_prior();
  std::vector<double> err(reps);
  parallel_for(std::size_t(reps), threads, [&](std::size_t rep) {
    const Eigen::MatrixXd s = sample_matrix(goe, d, d, derive_seed(seed, 2 * rep));
    const Eigen::MatrixXd y = std::sqrt(r) * s + sample_matrix(goe, d, d, derive_seed(seed, 2 * rep + 1));
    const Eigen::MatrixXd estimate = (std::sqrt(r) / (1.0 + r)) * y;
    err[rep] = (s - estimate).squaredNorm() / d;
  });
  double mean = 0.0;
  for (double e : err) mean += e;
  mean /= reps;
  const double target = 1.0 / (1.0 + r);
  MCReport rep = report("goe_denoising", d, d, reps, seed, std::abs(mean - target) / target, threshold);
  rep.detail = "r=" + fmt(r) + ", empirical=" + fmt(mean) + ", analytic=" + fmt(target);
  if (r > 0.0) {
    // The same quantity from the free-convolution pipeline: rho - q(r) = -4 psi'(r).
    const double pipeline = -4.0 * psi_p0_prime(goe.limiting_measure, r);
    rep.detail += ", pipeline=" + fmt(pipeline);
  }
  return rep;
}

MCReport check_clt_universality(SensingEnsemble ensemble, const PriorSpec& prior, int d, int n_samples,
                                std::uint64_t seed, int threads) {
  if (prior.rectangular) throw InvalidParameter("universality check needs a symmetric prior");
  if (d < 2) throw InvalidParameter("dimension d must be at least 2");
  if (n_samples < 1) throw InvalidParameter("n_samples must be positive");
  const Eigen::MatrixXd s = sample_matrix(prior, d, d, derive_seed(seed, 0));
  const double var = 2.0 * (s * s).trace() / d;
  const double inv_sqrt_d = 1.0 / std::sqrt(double(d));
  std::vector<double> stat(n_samples);
  parallel_for(std::size_t(n_samples), threads, [&](std::size_t k) {
    std::mt19937_64 gen = make_engine(derive_seed(seed, k + 1));
    double tr = 0.0;
    switch (ensemble) {
      case SensingEnsemble::Goe:
      case SensingEnsemble::IidRademacher: {
        std::normal_distribution<double> n01;
        std::bernoulli_distribution coin(0.5);
        auto draw = [&] { return ensemble == SensingEnsemble::Goe ? n01(gen) : (coin(gen) ? 1.0 : -1.0); };
        // Off-diagonal entries of variance 1/d, diagonal 2/d.
        for (int j = 0; j < d; ++j) {
          for (int i = 0; i < j; ++i) tr += 2.0 * draw() * s(i, j);
          tr += std::sqrt(2.0) * draw() * s(j, j);
        }
        tr *= inv_sqrt_d;
        break;
      }
      case SensingEnsemble::RankOneCentered: {
        std::normal_distribution<double> n01;
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x(i) = n01(gen);
        tr = (x.dot(s * x) - s.trace()) * inv_sqrt_d;
        break;
      }
    }
    stat[k] = tr;
  });
  std::sort(stat.begin(), stat.end());
  const double sd = std::sqrt(var);
  double ks = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double F = 0.5 * std::erfc(-stat[i] / (sd * std::numbers::sqrt2));
    ks = std::max({ks, double(i + 1) / n_samples - F, F - double(i) / n_samples});
  }
  static const char* names[] = {"goe", "iid_rademacher", "rank_one_centered"};
  MCReport r = report("clt_universality", d, d, n_samples, seed, ks, 1.5 * 1.63 / std::sqrt(double(n_samples)));
  r.detail = std::string(names[int(ensemble)]) + ", " + prior.name() + ", variance=" + fmt(var);
  return r;
}

MCReport check_rect_convolution(const PriorSpec& prior, double t, double beta, int d, int reps, std::uint64_t seed,
                                double threshold, int threads) {
  if (!prior.rectangular) throw InvalidParameter("rectangular convolution check needs a rectangular prior");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in (0, 1]");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("noise scale t must be nonnegative");
  check_sizes(d, reps, 200);
  const int L = std::max(d, int(std::lround(d / beta)));
  PriorSpec noise = prior;
  noise.kind = PriorKind::RectGaussian;
  const auto sv = pooled(reps, threads, [&](int rep) {
    Eigen::MatrixXd m = sample_matrix(prior, d, L, derive_seed(seed, 2 * std::uint64_t(rep)));
    if (t > 0.0) m += std::sqrt(t) * sample_matrix(noise, d, L, derive_seed(seed, 2 * std::uint64_t(rep) + 1));
    std::vector<double> s = singular_values(std::move(m)), both;
    for (double v : s) both.push_back(v), both.push_back(-v);
    return both;
  });
  const SpectralMeasure target =
      t > 0.0 ? rect_convolve(prior.limiting_measure, t, beta).measure : prior.limiting_measure;
  MCReport r = report("rect_convolution", d, L, reps, seed, wasserstein2(SpectralMeasure::empirical(sv), target), threshold);
  r.detail = prior.name() + ", t=" + fmt(t) + ", beta=" + fmt(beta);
  return r;
}

}  // namespace sensing
