#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace covdecay {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for this family or point (singular copula,
/// non-differentiable parameter point).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Non-finite integrand value at a quadrature node.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double u, double v)
      : Error(what), u_(u), v_(v) {}
  double u() const noexcept { return u_; }
  double v() const noexcept { return v_; }

 private:
  double u_;
  double v_;
};

/// An iterative search ran out of iterations. Carries the best iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_x, double best_value)
      : Error(what), best_x_(best_x), best_value_(best_value) {}
  double best_x() const noexcept { return best_x_; }
  double best_value() const noexcept { return best_value_; }

 private:
  double best_x_;
  double best_value_;
};

/// Correlation matrix is not positive definite. `minor()` is the order of the
/// first leading principal minor that is not positive.
class DefinitenessError : public Error {
 public:
  DefinitenessError(const std::string& what, std::size_t minor)
      : Error(what), minor_(minor) {}
  std::size_t minor() const noexcept { return minor_; }

 private:
  std::size_t minor_;
};

/// A construction would produce an invalid distribution (negative density).
class ValidityError : public Error {
 public:
  using Error::Error;
};

/// Sample with zero variance (or otherwise degenerate input).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Estimation failed. Carries the per-k trace computed before the failure.
class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& what, std::vector<double> trace = {})
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

class BootstrapError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace covdecay
