#pragma once

#include <stdexcept>
#include <string>

namespace adjopinf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (rows/cols/lengths).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A configuration or argument violates a documented precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A linear solve or factorization failed.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A time integration produced non-finite values or could not make progress.
///
/// For reduced models this is an expected outcome (an unstable parameter set),
/// so callers usually catch it and score the run as divergent.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double time)
        : Error(what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace adjopinf
