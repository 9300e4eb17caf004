#pragma once

#include <stdexcept>
#include <string>

namespace mvsr {

// Bad configuration or request; maps to exit code 2 at the CLI.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

// Filesystem and input-data failures; maps to exit code 3 at the CLI.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

} // namespace mvsr
