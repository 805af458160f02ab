#include "sensing/errors.hpp"

#include <sstream>

namespace sensing {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::DegenerateChannel: return "degenerate-channel";
    case ErrorKind::UnsupportedParameter: return "unsupported-parameter";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

static std::string with_residual(const std::string& w, double r) {
  std::ostringstream os;
  os << w << " (worst residual " << r << ")";
  return os.str();
}

ConvergenceError::ConvergenceError(const std::string& w, double residual)
    : Error(ErrorKind::Convergence, with_residual(w, residual)), residual_(residual) {}

}  // namespace sensing
