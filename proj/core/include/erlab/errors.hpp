#pragma once

#include <stdexcept>
#include <string>

namespace erlab {

// Invalid configuration or input file contents. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Task generation could not satisfy the reachability guarantee.
class GenerationError : public ConfigError {
public:
    explicit GenerationError(const std::string& what) : ConfigError(what) {}
};

// Non-finite values or undefined quantities encountered. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A requested computation exceeds a hard size cap. CLI exit code 4.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace erlab
