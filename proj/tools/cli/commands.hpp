#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace cdp::cli {

/// CSV header of the sweep output.
inline constexpr const char* kSweepHeader = "mode,D,P,value,status,achieved_D,achieved_P,iterations";

/// 17 significant digits, '.' separator; "inf" for +infinity, empty for NaN.
std::string format_number(double v);

struct SweepOutput {
    std::string csv;
    nlohmann::json kernels;  // array, one entry per row, in CSV order
    std::string oracle_csv;  // empty unless the config sets oracle_step
};

/// Solves every requested surface over the config grids.
SweepOutput run_sweep(const RunConfig& config, unsigned threads = 1);

/// One property suite result inside the audit report.
struct PropertyReport {
    std::string name;
    std::string statement;
    std::size_t trials = 0;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

/// Runs the randomized property suites (seeded from config.seed) plus the
/// surface checks on the configured instance.
std::vector<PropertyReport> run_audit(const RunConfig& config, std::size_t trials);

nlohmann::json audit_report(const RunConfig& config, std::size_t trials, const std::vector<PropertyReport>& suites);

/// Midpoint-convexity scan of the oracle's SCDP surface over the config grid.
/// Throws SizeError when the instance is too large for the oracle.
nlohmann::json probe_scdp_convexity(const RunConfig& config, double oracle_step);

/// Writes `content` to `path`; returns false on I/O failure.
bool write_file(const std::string& path, const std::string& content);

}  // namespace cdp::cli
