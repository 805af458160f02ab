#include "sensing/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sensing/apps.hpp"
#include "sensing/errors.hpp"
#include "sensing/freeconv.hpp"
#include "sensing/montecarlo.hpp"
#include "sensing/parallel.hpp"

namespace sensing::cli {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> with_grid(std::vector<std::string> keys, const std::string& prefix) {
  for (const char* s : {".values", ".start", ".stop", ".count", ".log"}) keys.push_back(prefix + s);
  return keys;
}

// Runs `build`, turning library parameter errors into config errors at `key`.
template <class F>
auto at_key(const Config& cfg, const std::string& key, F&& build) -> decltype(build()) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const UnsupportedParameter& e) {
    cfg.fail(key, std::string("unsupported parameter: ") + e.what());
  } catch (const InvalidParameter& e) {
    cfg.fail(key, e.what());
  } catch (const DegenerateChannel& e) {
    cfg.fail(key, e.what());
  }
}

// Table emission with error markers for failed or non-finite cells.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<json> row) {
    for (auto& cell : row)
      if (cell.is_number_float() && !std::isfinite(cell.get<double>())) {
        cell = kMarker;
        partial_ = true;
      }
    rows_.push_back(std::move(row));
  }
  void add_error(const json& key) {
    std::vector<json> row{key};
    row.resize(columns_.size(), kMarker);
    rows_.push_back(std::move(row));
    partial_ = true;
  }
  bool partial() const { return partial_; }

  void write(std::ostream& os, const std::string& format) const {
    if (format == "json") {
      json doc;
      doc["columns"] = columns_;
      doc["rows"] = json::array();
      for (const auto& row : rows_) {
        json obj;
        for (std::size_t i = 0; i < columns_.size(); ++i) obj[columns_[i]] = row[i];
        doc["rows"].push_back(obj);
      }
      os << doc.dump(2) << '\n';
      return;
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << '\n';
    }
  }

 private:
  static constexpr const char* kMarker = "ERROR";

  static std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<json>> rows_;
  bool partial_ = false;
};

std::string output_format(const Config& cfg) {
  const std::string f = cfg.str("output.format", "csv");
  if (f != "csv" && f != "json") cfg.fail("output.format", "output.format must be csv or json");
  return f;
}

// Writes to --out, else output.path, else the given stream.
void emit(const Config& cfg, const Overrides& o, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  const std::string path = !o.out.empty() ? o.out : cfg.str("output.path", "");
  if (path.empty()) {
    body(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  body(f);
  if (!f) throw std::runtime_error("failed writing output file " + path);
}

std::uint64_t seed_of(const Config& cfg, const Overrides& o) { return o.has_seed ? o.seed : cfg.u64("seed", 0); }

std::vector<json> curve_row(double alpha, const SolveResult& r, std::optional<double> psd_column) {
  return {alpha, r.q_star, r.r_star, r.f_limit, r.mutual_info, r.mmse_tensor,
          psd_column ? json(*psd_column) : json(nullptr),
          r.degenerate, r.converged};
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"model", "seed",
                               "prior.kind", "prior.kappa", "prior.beta", "prior.rank_ratio", "prior.path",
                               "prior.rho", "prior.psd", "prior.rectangular", "prior.sample_d", "prior.sample_reps",
                               "channel.activation", "channel.delta", "channel.randomness",
                               "quadrature.hermite_order", "quadrature.inner_order",
                               "solver.grid_size", "solver.q_tolerance", "solver.tie_tolerance",
                               "output.format", "output.path",
                               "nn.kappa", "nn.delta", "nn.delta0",
                               "bsr.beta", "bsr.rank_ratio",
                               "spike.p",
                               "potentials.function",
                               "verify.experiments", "verify.d", "verify.reps", "verify.t", "verify.r",
                               "verify.n_samples", "verify.ensemble", "verify.beta"};
    k = with_grid(k, "alpha");
    k = with_grid(k, "spike.lambda");
    k = with_grid(k, "potentials.grid");
    return k;
  }();
  return keys;
}

PriorSpec prior_from_config(const Config& cfg, std::uint64_t seed) {
  const std::string kind = cfg.str("prior.kind", "goe");
  if (kind == "goe") return goe_prior();
  if (kind == "wishart") {
    const double kappa = cfg.num("prior.kappa");
    return at_key(cfg, "prior.kappa", [&] { return wishart_prior(kappa); });
  }
  if (kind == "rect_gaussian") {
    const double beta = cfg.num("prior.beta", 1.0);
    return at_key(cfg, "prior.beta", [&] { return rect_gaussian_prior(beta); });
  }
  if (kind == "rect_product") {
    const double beta = cfg.num("prior.beta", 1.0), gamma = cfg.num("prior.rank_ratio");
    ProductSampling s;
    s.d = cfg.integer("prior.sample_d", s.d);
    s.reps = cfg.integer("prior.sample_reps", s.reps);
    s.seed = seed;
    if (s.d < 2) cfg.fail("prior.sample_d", "prior.sample_d must be at least 2");
    if (s.reps < 1) cfg.fail("prior.sample_reps", "prior.sample_reps must be positive");
    return at_key(cfg, "prior.rank_ratio", [&] { return rect_product_prior(beta, gamma, s); });
  }
  if (kind == "empirical") {
    const std::string path = cfg.str("prior.path");
    const SpectralMeasure mu = at_key(cfg, "prior.path", [&] {
      std::ifstream probe(path);
      if (!probe) throw InvalidParameter("measure file `" + path + "` does not exist");
      return load_measure(path);
    });
    const double rho = cfg.num("prior.rho");
    const bool psd = cfg.boolean("prior.psd", false), rect = cfg.boolean("prior.rectangular", false);
    const double beta = cfg.num("prior.beta", 1.0);
    return at_key(cfg, "prior.rho", [&] { return empirical_prior(mu, rho, psd, rect, beta); });
  }
  cfg.fail("prior.kind", "unknown prior kind `" + kind + "`");
}

ChannelSpec channel_from_config(const Config& cfg) {
  ChannelSpec ch;
  const std::string act = cfg.str("channel.activation", "linear");
  if (act == "linear") {
    ch.activation = Activation::Linear;
  } else if (act == "square") {
    ch.activation = Activation::Square;
  } else if (act == "tanh") {
    ch.activation = Activation::Custom;
    ch.custom = tanh_activation();
  } else {
    cfg.fail("channel.activation", "unknown activation `" + act + "`");
  }
  const std::string rnd = cfg.str("channel.randomness", "none");
  if (rnd == "none")
    ch.randomness = ChannelRandomness::None;
  else if (rnd == "normal_multiplier")
    ch.randomness = ChannelRandomness::NormalMultiplier;
  else
    cfg.fail("channel.randomness", "unknown channel randomness `" + rnd + "`");
  ch.delta = cfg.num("channel.delta", 1.0);
  if (!(ch.delta > 0.0) || !std::isfinite(ch.delta)) cfg.fail("channel.delta", "channel.delta must be positive");
  return ch;
}

QuadratureSpec quadrature_from_config(const Config& cfg) {
  QuadratureSpec q;
  q.hermite_order = cfg.integer("quadrature.hermite_order", q.hermite_order);
  q.inner_order = cfg.integer("quadrature.inner_order", q.inner_order);
  at_key(cfg, cfg.has("quadrature.hermite_order") ? "quadrature.hermite_order" : "quadrature.inner_order",
         [&] { q.validate(); return 0; });
  return q;
}

SolverOptions solver_from_config(const Config& cfg) {
  SolverOptions s;
  s.grid_size = cfg.integer("solver.grid_size", s.grid_size);
  s.q_tolerance = cfg.num("solver.q_tolerance", s.q_tolerance);
  s.tie_tolerance = cfg.num("solver.tie_tolerance", s.tie_tolerance);
  if (s.grid_size < 3) cfg.fail("solver.grid_size", "solver.grid_size must be at least 3");
  if (!(s.q_tolerance > 0.0)) cfg.fail("solver.q_tolerance", "solver.q_tolerance must be positive");
  if (!(s.tie_tolerance >= 0.0)) cfg.fail("solver.tie_tolerance", "solver.tie_tolerance must be nonnegative");
  s.quadrature = quadrature_from_config(cfg);
  return s;
}

std::vector<double> grid_from_config(const Config& cfg, const std::string& prefix) {
  if (cfg.has(prefix + ".values")) {
    if (cfg.has(prefix + ".start")) cfg.fail(prefix + ".start", "give either " + prefix + ".values or a range");
    return cfg.list(prefix + ".values");
  }
  if (!cfg.has(prefix + ".start")) return {};
  const double a = cfg.num(prefix + ".start"), b = cfg.num(prefix + ".stop");
  const int n = cfg.integer(prefix + ".count", 0);
  const bool log = cfg.boolean(prefix + ".log", false);
  if (n < 0) cfg.fail(prefix + ".count", prefix + ".count must be nonnegative");
  if (log && !(a > 0.0 && b > 0.0)) cfg.fail(prefix + ".start", "a log grid needs positive endpoints");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    const double u = n == 1 ? 0.0 : double(i) / double(n - 1);
    g[i] = log ? a * std::pow(b / a, u) : a + (b - a) * u;
  }
  if (n > 1) g.back() = b;
  return g;
}

int run_curve(const Config& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
  const std::string model = cfg.str("model", "symmetric");
  if (model == "spike") return run_spike(cfg, o, out, err);
  const std::string format = output_format(cfg);
  const std::vector<double> alphas = grid_from_config(cfg, "alpha");
  for (double a : alphas)
    if (!(a > 0.0) || !std::isfinite(a)) cfg.fail(cfg.has("alpha.values") ? "alpha.values" : "alpha.start", "alpha values must be positive");
  const SolverOptions opts = solver_from_config(cfg);
  const std::uint64_t seed = seed_of(cfg, o);

  PriorSpec prior = goe_prior();
  ChannelSpec ch;
  Model mode = Model::Symmetric;
  double kappa = 0.0;
  if (model == "symmetric" || model == "rectangular") {
    prior = prior_from_config(cfg, seed);
    ch = channel_from_config(cfg);
    mode = model == "symmetric" ? Model::Symmetric : Model::Rectangular;
    if (prior.rectangular != (mode == Model::Rectangular))
      cfg.fail("prior.kind", "prior `" + prior.name() + "` does not match model `" + model + "`");
  } else if (model == "nn") {
    NNProblem p{cfg.num("nn.kappa"), cfg.num("nn.delta", 0.0), cfg.num("nn.delta0"), 1.0};
    at_key(cfg, "nn.kappa", [&] { p.validate(); return 0; });
    prior = wishart_prior(p.kappa);
    ch.delta = nn_effective_noise(p);
    kappa = p.kappa;
  } else if (model == "bsr") {
    const double beta = cfg.num("bsr.beta", 1.0), gamma = cfg.num("bsr.rank_ratio");
    ProductSampling s;
    s.d = cfg.integer("prior.sample_d", s.d);
    s.reps = cfg.integer("prior.sample_reps", s.reps);
    s.seed = seed;
    prior = at_key(cfg, "bsr.rank_ratio", [&] { return rect_product_prior(beta, gamma, s); });
    ch = channel_from_config(cfg);
    mode = Model::Rectangular;
  } else {
    cfg.fail("model", "unknown model `" + model + "`");
  }

  const auto entries = sweep(prior, ch, alphas, mode, opts, o.threads);
  Table table({"alpha", "q_star", "r_star", "f_limit", "mutual_info", "mmse_tensor", "mmse_psd", "degenerate",
               "converged"});
  bool failed = false;
  for (const auto& e : entries) {
    if (!e.result) {
      err << "alpha=" << e.alpha << ": " << e.error << '\n';
      table.add_error(e.alpha);
      failed = true;
      continue;
    }
    const SolveResult& r = *e.result;
    // For the quadratic network the PSD column carries the generalization error kappa (rho - q*).
    std::optional<double> psd = r.mmse_psd;
    if (model == "nn" && psd) psd = kappa * *psd;
    if (!r.converged) err << "alpha=" << e.alpha << ": " << r.diagnostic << '\n';
    table.add(curve_row(e.alpha, r, psd));
  }
  emit(cfg, o, out, [&](std::ostream& os) { table.write(os, format); });
  return failed || table.partial() ? kExitPartial : kExitOk;
}

int run_spike(const Config& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
  (void)err;
  const std::string format = output_format(cfg);
  const PriorSpec prior = prior_from_config(cfg, seed_of(cfg, o));
  if (prior.rectangular) cfg.fail("prior.kind", "the spiked tensor model needs a symmetric prior");
  const int p = cfg.integer("spike.p", 2);
  if (p < 2) cfg.fail("spike.p", "spike.p must be at least 2");
  const std::vector<double> lambdas = grid_from_config(cfg, "spike.lambda");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) cfg.fail("spike.lambda.values", "lambda values must be nonnegative");
  const int grid = solver_from_config(cfg).grid_size;
  std::vector<std::optional<SpikeResult>> res(lambdas.size());
  std::vector<std::string> errors(lambdas.size());
  parallel_for(lambdas.size(), o.threads, [&](std::size_t i) {
    try {
      res[i] = solve_spike(prior, lambdas[i], p, grid);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  Table table({"lambda", "q_star", "f_limit"});
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!res[i]) {
      err << "lambda=" << lambdas[i] << ": " << errors[i] << '\n';
      table.add_error(lambdas[i]);
    } else {
      table.add({lambdas[i], res[i]->q_star, res[i]->f_limit});
    }
  }
  emit(cfg, o, out, [&](std::ostream& os) { table.write(os, format); });
  return table.partial() ? kExitPartial : kExitOk;
}

int run_potentials(const Config& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
  const std::string format = output_format(cfg);
  const std::string fn = cfg.str("potentials.function", "psi_p0");
  const PriorSpec prior = prior_from_config(cfg, seed_of(cfg, o));
  const bool on_r = fn == "psi_p0" || fn == "psi_rec";
  if (!on_r && fn != "psi_out" && fn != "psi_out_rec") cfg.fail("potentials.function", "unknown potential `" + fn + "`");
  if ((fn == "psi_p0" && prior.rectangular) || (fn == "psi_rec" && !prior.rectangular))
    cfg.fail("potentials.function", "potential `" + fn + "` does not match prior `" + prior.name() + "`");

  std::vector<double> grid;
  if (cfg.has("potentials.grid.values") || cfg.has("potentials.grid.start")) {
    grid = grid_from_config(cfg, "potentials.grid");
  } else if (on_r) {
    for (int i = 0; i < 40; ++i) grid.push_back(1e-3 * std::pow(1e6, i / 39.0));
  } else {
    for (int i = 0; i < 64; ++i) grid.push_back(prior.rho * i / 63.0);
  }

  std::function<double(double)> f;
  std::shared_ptr<const DenoisingPotential> den;
  std::shared_ptr<const ChannelPotential> chan;
  if (fn == "psi_p0") {
    den = DenoisingPotential::symmetric(prior.limiting_measure);
  } else if (fn == "psi_rec") {
    den = DenoisingPotential::rectangular(prior.limiting_measure, prior.beta);
  } else {
    const ChannelSpec ch = channel_from_config(cfg);
    chan = ChannelPotential::get(ch, prior.rho, quadrature_from_config(cfg), fn == "psi_out_rec");
  }
  std::vector<double> values(grid.size(), NAN);
  std::vector<std::string> errors(grid.size());
  parallel_for(grid.size(), o.threads, [&](std::size_t i) {
    try {
      values[i] = den ? den->value(grid[i]) : chan->value(grid[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  Table table({on_r ? "r" : "q", fn});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!errors[i].empty()) {
      err << (on_r ? "r=" : "q=") << grid[i] << ": " << errors[i] << '\n';
      table.add_error(grid[i]);
    } else {
      table.add({grid[i], values[i]});
    }
  }
  emit(cfg, o, out, [&](std::ostream& os) { table.write(os, format); });
  return table.partial() ? kExitPartial : kExitOk;
}

int run_verify(const Config& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
  (void)err;
  const std::uint64_t seed = seed_of(cfg, o);
  std::vector<std::string> names = cfg.words("verify.experiments");
  if (names.empty()) names = {"free_convolution"};
  static const std::set<std::string> known{"free_convolution", "goe_denoising", "clt_universality",
                                           "rect_convolution"};
  for (const auto& n : names)
    if (!known.count(n)) cfg.fail("verify.experiments", "unknown experiment `" + n + "`");

  const bool has_prior = cfg.has("prior.kind");
  std::optional<PriorSpec> configured;
  if (has_prior) configured = prior_from_config(cfg, seed);
  auto symmetric_prior = [&](const std::string& exp) {
    if (!configured) return goe_prior();
    if (configured->rectangular) cfg.fail("prior.kind", "experiment `" + exp + "` needs a symmetric prior");
    return *configured;
  };
  auto list_or = [&](const std::string& key, std::vector<double> fallback) {
    return cfg.has(key) ? cfg.list(key) : fallback;
  };

  json suite = json::array();
  bool all = true;
  auto add = [&](const MCReport& r) {
    suite.push_back(r.to_json());
    all = all && r.passed;
  };
  for (const auto& name : names) {
    if (name == "free_convolution") {
      const PriorSpec p = symmetric_prior(name);
      for (double t : list_or("verify.t", {0.5, 1.0, 2.0}))
        add(at_key(cfg, "verify.d", [&] {
          return check_free_convolution(p, t, cfg.integer("verify.d", 2000), cfg.integer("verify.reps", 5), seed, 0.05,
                                        o.threads);
        }));
    } else if (name == "goe_denoising") {
      for (double r : list_or("verify.r", {0.0, 1.0, 9.0}))
        add(at_key(cfg, "verify.d", [&] {
          return check_goe_denoising(r, cfg.integer("verify.d", 1000), cfg.integer("verify.reps", 10), seed, 0.02,
                                     o.threads);
        }));
    } else if (name == "clt_universality") {
      const PriorSpec p = symmetric_prior(name);
      std::vector<std::string> ens = cfg.words("verify.ensemble");
      if (ens.empty()) ens = {"rank_one_centered"};
      for (const auto& e : ens) {
        SensingEnsemble kind;
        if (e == "goe")
          kind = SensingEnsemble::Goe;
        else if (e == "iid_rademacher")
          kind = SensingEnsemble::IidRademacher;
        else if (e == "rank_one_centered")
          kind = SensingEnsemble::RankOneCentered;
        else
          cfg.fail("verify.ensemble", "unknown ensemble `" + e + "`");
        add(at_key(cfg, "verify.d", [&] {
          return check_clt_universality(kind, p, cfg.integer("verify.d", 200), cfg.integer("verify.n_samples", 2000),
                                        seed, o.threads);
        }));
      }
    } else {
      PriorSpec p = configured && configured->rectangular
                        ? *configured
                        : at_key(cfg, "verify.beta", [&] { return rect_gaussian_prior(cfg.num("verify.beta", 1.0)); });
      if (configured && !configured->rectangular && has_prior)
        cfg.fail("prior.kind", "experiment `rect_convolution` needs a rectangular prior");
      for (double t : list_or("verify.t", {1.0}))
        add(at_key(cfg, "verify.d", [&] {
          return check_rect_convolution(p, t, p.beta, cfg.integer("verify.d", 1000), cfg.integer("verify.reps", 5),
                                        seed, 0.05, o.threads);
        }));
    }
  }
  json doc;
  doc["suite"] = suite;
  doc["all_passed"] = all;
  emit(cfg, o, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  return all ? kExitOk : kExitFailure;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asymptotic limits of matrix sensing: replica-symmetric curves and Monte Carlo checks"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides o;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Config&, const Overrides&, std::ostream&, std::ostream&);
  };
  static const Command commands[] = {
      {"curve", "Solve the replica-symmetric problem on an alpha grid", run_curve},
      {"verify", "Run Monte Carlo verification experiments", run_verify},
      {"potentials", "Tabulate denoising or channel potentials", run_potentials},
      {"spike", "Extremize the spiked-tensor potential on a lambda grid", run_spike},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "Configuration file")->required();
    sub->add_option("--out", o.out, "Output file (default: output.path or stdout)");
    sub->add_option("--seed", o.seed, "Seed overriding the config");
    sub->add_option("--threads", o.threads, "Worker threads (default: SENSING_LIMITS_THREADS or all cores)");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  for (CLI::App* s : subs)
    if (s->count_all() > 0 && s->get_option("--seed")->count() > 0) o.has_seed = true;
  try {
    const Config cfg = Config::load(config_path);
    const auto& keys = known_keys();
    cfg.restrict_to(std::set<std::string>(keys.begin(), keys.end()));
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return commands[i].run(cfg, o, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace sensing::cli
