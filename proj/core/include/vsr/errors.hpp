#pragma once

#include <stdexcept>
#include <string>

namespace vsr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text or configuration value.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Argument lies outside the validated domain of a table-backed function.
class DomainExceeded : public Error {
 public:
  using Error::Error;
};

/// Inversion target lies above f(domain_hint).
class RangeExceeded : public Error {
 public:
  using Error::Error;
};

/// Composition leaves the hard domain of the outer function.
class DomainMismatch : public Error {
 public:
  using Error::Error;
};

/// Integration blew past the state cap or the step size underflowed.
class FiniteEscape : public Error {
 public:
  FiniteEscape(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class EmptyDomain : public Error {
 public:
  using Error::Error;
};

/// Sequence specification violates its own constraints.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// F(0,0,T) != 0 beyond tolerance.
class OriginNotFixed : public Error {
 public:
  OriginNotFixed(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Not even the smallest scanned sampling period could be certified.
class NoneCertified : public Error {
 public:
  using Error::Error;
};

}  // namespace vsr
