#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sensing/channels.hpp"
#include "sensing/config.hpp"
#include "sensing/priors.hpp"
#include "sensing/solver.hpp"

namespace sensing::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // fatal error, or a verification suite that did not pass
inline constexpr int kExitConfig = 2;   // usage or configuration error
inline constexpr int kExitPartial = 3;  // some rows carry error markers

struct Overrides {
  std::string out;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int threads = 0;
};

// Every key the configuration format understands.
const std::vector<std::string>& known_keys();

PriorSpec prior_from_config(const Config& cfg, std::uint64_t seed);
ChannelSpec channel_from_config(const Config& cfg);
QuadratureSpec quadrature_from_config(const Config& cfg);
SolverOptions solver_from_config(const Config& cfg);
// `<prefix>.values`, or `<prefix>.start/stop/count/log`. Empty when absent.
std::vector<double> grid_from_config(const Config& cfg, const std::string& prefix);

int run_curve(const Config& cfg, const Overrides& o, std::ostream& out, std::ostream& err);
int run_verify(const Config& cfg, const Overrides& o, std::ostream& out, std::ostream& err);
int run_potentials(const Config& cfg, const Overrides& o, std::ostream& out, std::ostream& err);
int run_spike(const Config& cfg, const Overrides& o, std::ostream& out, std::ostream& err);

// Entry point: `<prog> <curve|verify|potentials|spike> --config <path> [--out <path>]
// [--seed <u64>] [--threads <n>]`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sensing::cli
