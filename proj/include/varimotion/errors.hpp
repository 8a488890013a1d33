#pragma once

#include <stdexcept>
#include <string>

namespace varimotion {

/// Invalid parameters or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A time step could not be completed (solver failure, NaN, degenerate stencil).
class StepFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries the line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace varimotion
