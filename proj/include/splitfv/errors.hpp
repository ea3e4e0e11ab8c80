#pragma once

#include <stdexcept>
#include <string>

namespace splitfv {

/// Base class for failures raised while advancing a solution.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested time step exceeds the CFL limit of the numerical flux.
class CflViolation : public SolverError {
public:
    using SolverError::SolverError;
};

/// The implicit source equation could not be solved.
class SourceSolveError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Factory velocity dropped to (numerically) zero; influx can no longer be imposed.
class JamError : public SolverError {
public:
    using SolverError::SolverError;
};

/// A stage produced NaN or Inf.
class NonFiniteError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Configuration text could not be parsed or validated.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace splitfv
