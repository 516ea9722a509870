#pragma once

#include <stdexcept>
#include <string>

namespace irsim {

/// Invalid wiring of a simulation: unknown level ids, bad edges, malformed
/// experiment configuration. Raised before or while building a simulation.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A model function violated its contract at runtime (e.g. a reaction that
/// would stall the clock, or a missing per-cell influence).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace irsim
