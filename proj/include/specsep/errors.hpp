#pragma once

#include <stdexcept>
#include <string>

namespace specsep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: malformed measure, bad options, bad config values.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Evaluation hit a singularity of a rational map.
class PoleError : public Error {
public:
    using Error::Error;
};

/// Iterative method ran out of iterations.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace specsep
