#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdp/solver.hpp"

namespace cdp::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kSuccess = 0, kAuditFailed = 1, kConfigError = 2, kIoError = 3, kSizeError = 4 };

/// Malformed configuration; `field` names the offending JSON key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Mode { Cdp, Scdp, Both };

inline constexpr std::uint64_t kDefaultConfigSeed = 42;

struct RunConfig {
    ProblemInstance instance;
    std::vector<double> d_grid;
    std::vector<double> p_grid;
    Mode mode = Mode::Cdp;
    std::optional<double> oracle_step;
    std::uint64_t seed = kDefaultConfigSeed;
    std::string output_path;
};

/// Builds a RunConfig from parsed JSON. Every embedded vector is validated
/// against its type's invariants; failures throw ConfigError.
RunConfig parse_config(const nlohmann::json& j);

/// Reads and parses a config file. Unreadable or non-JSON files throw ConfigError.
RunConfig load_config(const std::string& path);

/// "inf" for +infinity, otherwise the shortest round-trip JSON number.
nlohmann::json budget_to_json(double v);

}  // namespace cdp::cli
