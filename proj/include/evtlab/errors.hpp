#pragma once

#include <stdexcept>
#include <string>

namespace evtlab {

// Every error carries the process exit code the CLI maps it to.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, int exit_code)
        : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

// Malformed configuration or violated precondition.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what, 1) {}
};

// Containment of pulled-back balls cannot be certified (condition R3).
class IndeterminateError : public Error {
public:
    explicit IndeterminateError(const std::string& what) : Error(what, 2) {}
};

// Arc budget, step budget or similar resource exhausted.
class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& what) : Error(what, 3) {}
};

// Level outside the regime where shape laws apply, or a numeric failure.
class RegimeError : public Error {
public:
    explicit RegimeError(const std::string& what) : Error(what, 4) {}
};

}  // namespace evtlab
