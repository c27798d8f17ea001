#pragma once

#include <stdexcept>
#include <string>

namespace countgest {

/// Bad configuration (geometry, config file, CLI usage). The CLI maps
/// this to exit code 1; other runtime failures map to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace countgest
