#pragma once

#include <stdexcept>
#include <string>

namespace spinn {

// Array dimensions do not agree with the network architecture or each other.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A problem, enforcement or experiment is missing something it needs.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Derivative order outside what the library implements.
class UnsupportedOrder : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A trace was built from different inputs than the ones it is paired with.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed (divergence, non-finite values, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace spinn
