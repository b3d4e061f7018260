#pragma once

#include <stdexcept>
#include <string>

namespace radocc {

/// Invalid configuration or arguments (CLI exit code 1).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Missing, malformed, or inconsistent data on disk (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values or a broken numeric contract (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace radocc
