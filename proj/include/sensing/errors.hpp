#pragma once

#include <stdexcept>
#include <string>

namespace sensing {

enum class ErrorKind {
  InvalidParameter,
  Domain,
  Convergence,
  Divergence,
  DegenerateChannel,
  UnsupportedParameter,
  Numeric,
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidParameter : Error {
  explicit InvalidParameter(const std::string& w) : Error(ErrorKind::InvalidParameter, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::Domain, w) {}
};
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& w) : Error(ErrorKind::Divergence, w) {}
};
struct DegenerateChannel : Error {
  explicit DegenerateChannel(const std::string& w) : Error(ErrorKind::DegenerateChannel, w) {}
};
struct UnsupportedParameter : Error {
  explicit UnsupportedParameter(const std::string& w) : Error(ErrorKind::UnsupportedParameter, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};

// Carries the worst residual seen when an iteration cap is hit.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& w, double residual);
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace sensing
