#pragma once

#include <stdexcept>
#include <string>

namespace opertail {

// Every failure raised by the library derives from Error. The CLI maps the
// subclasses onto its exit codes (DomainError/ConfigError -> 2, the rest -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an argument outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Liouville integrability condition fails (radial integral diverges).
class IntegrabilityError : public DomainError {
 public:
  explicit IntegrabilityError(const std::string& detail)
      : DomainError("integrability violated: " + detail) {}
};

// Driving function is not regularly varying, so no operator limit exists.
class NotRegularlyVaryingError : public DomainError {
 public:
  explicit NotRegularlyVaryingError(const std::string& detail)
      : DomainError("not operator-regularly varying: " + detail) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& detail) : Error("divergent: " + detail) {}
};

// Quadrature or root-finding did not reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace opertail
