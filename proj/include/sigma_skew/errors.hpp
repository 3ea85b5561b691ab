#pragma once

#include <stdexcept>
#include <string>

namespace sigma_skew {

/// Invalid argument to a constructor or operation (bad dt, alpha outside
/// [0,1], malformed schedule, misaligned grids, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The quadratic variation clock of a process does not reach the requested horizon.
class InsufficientQvError : public std::runtime_error {
public:
    InsufficientQvError(double attained, double requested);

    double attained() const noexcept { return attained_; }
    double requested() const noexcept { return requested_; }

private:
    double attained_;
    double requested_;
};

/// A construction whose hypotheses the input does not satisfy.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sigma_skew
