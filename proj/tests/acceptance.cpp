// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sensing/apps.hpp"
#include "sensing/channels.hpp"
#include "sensing/freeconv.hpp"
#include "sensing/montecarlo.hpp"
#include "sensing/priors.hpp"
#include "sensing/solver.hpp"

using namespace sensing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

std::vector<double> log_grid(double a, double b, int n) {
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = a * std::pow(b / a, double(i) / (n - 1));
  r.front() = a;
  r.back() = b;
  return r;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome goe_chain() {
  const auto t0 = Clock::now();
  const SpectralMeasure goe = semicircle(1.0);
  double worst = 0.0;
  for (double r : log_grid(1e-3, 1e3, 40)) worst = std::max(worst, std::abs(psi_p0(goe, r) - oracle::psi_goe(r)));
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs <= 60.0, fmt("max error %.2e over 40 r, %.1f s", worst, secs)};
}

Outcome linear_channel() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double delta : {0.1, 1.0, 10.0}) {
    ChannelSpec ch;
    ch.delta = delta;
    for (int i = 0; i < 64; ++i) {
      const double q = i / 63.0;
      worst = std::max(worst, std::abs(psi_out(ch, q, 1.0) - oracle::psi_out_linear(q, 1.0, delta)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs <= 10.0, fmt("max error %.2e over 192 points, %.1f s", worst, secs)};
}

Outcome symmetric_oracle() {
  const PriorSpec goe = goe_prior();
  const ChannelSpec ch;
  const SolveResult r = solve(goe, ch, 1.0);
  const double q_ref = (7.0 - std::sqrt(17.0)) / 4.0;
  const double dq = std::abs(r.q_star - q_ref), dm = std::abs(r.mmse_tensor - (1.0 - r.q_star * r.q_star));
  bool monotone = true;
  double prev = INFINITY;
  int errors = 0;
  for (const auto& e : sweep(goe, ch, log_grid(1e-2, 1e2, 13), Model::Symmetric)) {
    if (!e.result) {
      ++errors;
      continue;
    }
    monotone = monotone && e.result->mmse_tensor <= prev + 1e-9;
    prev = e.result->mmse_tensor;
  }
  return {dq <= 1e-4 && dm <= 2e-4 && monotone && errors == 0,
          fmt("|q*-ref| %.1e, |mmse-(1-q*^2)| %.1e, sweep of 13 alphas %s", dq, dm,
              monotone && errors == 0 ? "monotone" : "NOT monotone")};
}

Outcome rectangular_oracle() {
  const SolveResult r = solve_rec(rect_gaussian_prior(1.0), ChannelSpec{}, 1.0, 1.0);
  const double dq = std::abs(r.q_star - (3.0 - std::sqrt(5.0)) / 2.0);
  return {dq <= 1e-4, fmt("|q*-ref| %.1e", dq)};
}

Outcome nn_limit() {
  double worst = 0.0;
  for (double kappa : {0.5, 2.0})
    for (double delta : {0.0, 1.0}) {
      const NNResult r = nn_generalization_mmse({kappa, delta, 0.1, 1e-8});
      worst = std::max(worst, std::abs(r.mmse_gen - 1.0));
    }
  return {worst <= 1e-3, fmt("max |mmse-1| %.1e over 4 settings", worst)};
}

Outcome free_convolution_mc() {
  const auto t0 = Clock::now();
  bool pass = true;
  double worst = 0.0;
  for (const PriorSpec& p : {goe_prior(), wishart_prior(2.0)})
    for (double t : {0.5, 1.0, 2.0}) {
      const MCReport r = check_free_convolution(p, t, 2000, 5, 0x5eed);
      pass = pass && r.passed;
      worst = std::max(worst, r.statistic);
    }
  const double secs = seconds_since(t0);
  return {pass && secs <= 300.0, fmt("max W2 %.4f over 6 runs, %.0f s", worst, secs)};
}

Outcome denoising_mc() {
  bool pass = true;
  double worst = 0.0;
  for (double r : {0.0, 1.0, 9.0}) {
    const MCReport rep = check_goe_denoising(r, 1000, 10, 0x5eed);
    pass = pass && rep.passed;
    worst = std::max(worst, rep.statistic);
  }
  return {pass, fmt("max relative error %.4f", worst)};
}

Outcome clt_mc() {
  const MCReport r = check_clt_universality(SensingEnsemble::RankOneCentered, goe_prior(), 200, 2000, 0x5eed);
  return {r.passed, fmt("KS %.4f, threshold %.4f", r.statistic, r.threshold)};
}

// Non-increasing, convex and rho/k-Lipschitz on 40 log-spaced r.
int denoising_violations(const DenoisingPotential& p) {
  const auto r = log_grid(1e-3, 1e3, 40);
  std::vector<double> v(r.size());
  for (size_t i = 0; i < r.size(); ++i) v[i] = p.value(r[i]);
  const double lip = p.rho() / p.coupling();
  int bad = 0;
  for (size_t i = 1; i < r.size(); ++i) {
    bad += v[i] > v[i - 1] + 1e-9;
    bad += std::abs(v[i] - v[i - 1]) > lip * (r[i] - r[i - 1]) + 1e-6;
  }
  for (size_t i = 1; i + 1 < r.size(); ++i) {
    const double s1 = (v[i] - v[i - 1]) / (r[i] - r[i - 1]), s2 = (v[i + 1] - v[i]) / (r[i + 1] - r[i]);
    bad += (s2 - s1) / (0.5 * (r[i + 1] - r[i - 1])) < -1e-6;
  }
  return bad;
}

// Non-decreasing and convex on 64 q points in [0, rho].
int channel_violations(const ChannelPotential& c) {
  const int n = 64;
  const double h = c.rho() / (n - 1);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = c.value(std::min(c.rho(), i * h));
  int bad = 0;
  for (int i = 1; i < n; ++i) bad += (v[i] - v[i - 1]) / h < -1e-6;
  for (int i = 1; i + 1 < n; ++i) bad += (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h) < -1e-6;
  return bad;
}

Outcome properties() {
  int bad = 0, checked = 0;
  std::ostringstream where;
  const std::vector<PriorSpec> priors{goe_prior(), wishart_prior(0.5), wishart_prior(2.0), rect_gaussian_prior(1.0),
                                      rect_gaussian_prior(0.5), rect_product_prior(0.5, 1.0)};
  for (const auto& p : priors) {
    const auto pot = p.rectangular ? DenoisingPotential::rectangular(p.limiting_measure, p.beta)
                                   : DenoisingPotential::symmetric(p.limiting_measure);
    const int b = denoising_violations(*pot);
    ++checked;
    if (b) where << ' ' << p.name();
    bad += b;
  }
  for (Activation act : {Activation::Linear, Activation::Square, Activation::Custom})
    for (ChannelRandomness rnd : {ChannelRandomness::None, ChannelRandomness::NormalMultiplier})
      for (bool rect : {false, true}) {
        ChannelSpec ch;
        ch.activation = act;
        ch.randomness = rnd;
        ch.delta = 0.5;
        if (act == Activation::Custom) ch.custom = tanh_activation();
        const int b = channel_violations(*ChannelPotential::get(ch, 1.0, QuadratureSpec{}, rect));
        ++checked;
        if (b) where << ' ' << ch.key() << (rect ? "/rec" : "");
        bad += b;
      }
  double spike = 0.0;
  for (double lambda : {0.0, 1.0, 5.0})
    for (int p : {2, 3}) spike = std::max(spike, std::abs(f_rs_spike(goe_prior(), 0.0, lambda, p)));
  const bool pass = bad == 0 && spike <= 1e-3;
  return {pass, fmt("%d potentials, %d violations%s, max |f_spike(0)| %.1e", checked, bad, where.str().c_str(), spike)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"GOE closed-form denoising potential", goe_chain},
      {"linear channel closed form", linear_channel},
      {"symmetric end-to-end oracle", symmetric_oracle},
      {"rectangular end-to-end oracle", rectangular_oracle},
      {"quadratic network limit at vanishing alpha", nn_limit},
      {"free convolution Monte Carlo", free_convolution_mc},
      {"GOE denoising Monte Carlo", denoising_mc},
      {"universality CLT Monte Carlo", clt_mc},
      {"property suites", properties},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
