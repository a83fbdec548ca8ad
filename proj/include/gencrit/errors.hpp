#pragma once

#include <stdexcept>
#include <string>

namespace gencrit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value; the message names the offending field.
struct ConfigError : Error {
    using Error::Error;
};

/// A referenced id (question, response) does not exist.
struct LookupError : Error {
    using Error::Error;
};

struct ArgumentError : Error {
    using Error::Error;
};

/// Operation not allowed in the cache's current mode.
struct ModeError : Error {
    using Error::Error;
};

/// Non-finite value where a finite one is required.
struct NumericError : Error {
    using Error::Error;
};

/// Dataset construction produced no usable data.
struct DataError : Error {
    using Error::Error;
};

/// Training run aborted (e.g. persistent cache starvation).
struct RunError : Error {
    using Error::Error;
};

}  // namespace gencrit
