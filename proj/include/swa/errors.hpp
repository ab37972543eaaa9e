#pragma once

#include <stdexcept>
#include <string>

namespace swa {

/// Malformed or inconsistent input data (CSV shape, non-finite cells, unknown names).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fit or bound that cannot be evaluated (saturated model, singular design).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters supplied by the caller.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace swa
