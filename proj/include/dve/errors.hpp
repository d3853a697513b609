#pragma once

#include <stdexcept>
#include <string>

namespace dve {

// Bad user-facing configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite state or other numeric breakdown mid-run (CLI exit code 3).
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& msg, int step) : std::runtime_error(msg), step_index(step) {}
    int step_index;
};

}  // namespace dve
