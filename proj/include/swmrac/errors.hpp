#pragma once

#include <stdexcept>
#include <string>

namespace swmrac {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, long double det)
      : Error(what), det_(det) {}
  long double det() const { return det_; }

 private:
  long double det_;
};

// A documented precondition was not met (e.g. a non-symmetric input to the
// symmetric eigensolver).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Time went backwards where the caller promised monotone time.
class TemporalOrderError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// The matching conditions A + B Kx = A_ref, B Kr = B_ref have no solution
// for some plant segment.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// The state norm crossed the divergence guard: the run is aborted instead of
// propagating inf/NaN.
class FiniteEscapeError : public Error {
 public:
  FiniteEscapeError(const std::string& what, double time, double state_norm)
      : Error(what), time_(time), state_norm_(state_norm) {}
  double time() const { return time_; }
  double state_norm() const { return state_norm_; }

 private:
  double time_;
  double state_norm_;
};

}  // namespace swmrac
