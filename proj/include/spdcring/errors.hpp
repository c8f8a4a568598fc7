#pragma once

#include <stdexcept>
#include <string>

namespace spdcring {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy maps onto the CLI exit codes: config 2, numeric 3, io 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace spdcring
