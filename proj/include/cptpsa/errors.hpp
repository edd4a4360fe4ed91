#pragma once

#include <stdexcept>
#include <string>

namespace cptpsa {

// Base of every error raised by the library. Each subclass maps to one
// failure mode that callers (and the CLI exit codes) distinguish.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Null space of a Liouvillian is not one-dimensional, or a shifted
// Liouvillian is numerically singular.
class SingularSystem : public Error {
  public:
    using Error::Error;
};

// Adaptive integrator could not meet the requested tolerance.
class StepFailure : public Error {
  public:
    using Error::Error;
};

// z-grid refinement did not stabilise the propagated fields.
class ConvergenceFailure : public Error {
  public:
    using Error::Error;
};

class FitFailure : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace cptpsa
