#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "gfsim/sim.hpp"

namespace gfsim {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

/// Parses the flat `key = value` format. Keys before the first `[scheme]`
/// header are global; each `[scheme]` block takes `scheme` and `w`.
SimConfig parse_config(const std::string& text);

SimConfig load_config(const std::filesystem::path& path);

} // namespace gfsim
