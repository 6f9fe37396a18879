#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cdp/errors.hpp"
#include "cli/commands.hpp"

namespace {

using namespace cdp::cli;

struct Flags {
    std::string config;
    std::string out;
    std::size_t trials = 200;
    std::optional<std::uint64_t> seed;
    std::optional<double> oracle_step;
    bool dump_kernels = false;
};

constexpr double kDefaultProbeStep = 0.05;

// Writes to `path`, or to stdout when no path was given.
bool emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return static_cast<bool>(std::cout);
    }
    return write_file(path, content);
}

int io_failure(const std::string& path) {
    std::cerr << "error: cannot write " << path << '\n';
    return kIoError;
}

RunConfig load(const Flags& f) {
    RunConfig cfg = load_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.oracle_step) {
        if (!(*f.oracle_step > 0.0 && *f.oracle_step <= 1.0)) throw ConfigError("--oracle-step", "must lie in (0,1]");
        cfg.oracle_step = f.oracle_step;
    }
    return cfg;
}

std::string out_path(const Flags& f, const RunConfig& cfg) { return f.out.empty() ? cfg.output_path : f.out; }

int sweep(const Flags& f) {
    const RunConfig cfg = load(f);
    const std::string path = out_path(f, cfg);
    const SweepOutput out = run_sweep(cfg);
    if (!emit(path, out.csv)) return io_failure(path);
    if (f.dump_kernels) {
        const std::string k = path.empty() ? "kernels.json" : path + ".kernels.json";
        if (!write_file(k, out.kernels.dump(2) + '\n')) return io_failure(k);
    }
    if (cfg.oracle_step) {
        const std::string o = path.empty() ? "oracle.csv" : path + ".oracle.csv";
        if (!write_file(o, out.oracle_csv)) return io_failure(o);
    }
    return kSuccess;
}

int audit(const Flags& f) {
    if (f.trials == 0) throw ConfigError("--trials", "must be positive");
    const RunConfig cfg = load(f);
    const std::string path = out_path(f, cfg);
    const auto suites = run_audit(cfg, f.trials);
    const nlohmann::json report = audit_report(cfg, f.trials, suites);
    if (!emit(path, report.dump(2) + '\n')) return io_failure(path);
    return report.at("pass").get<bool>() ? kSuccess : kAuditFailed;
}

int probe(const Flags& f) {
    const RunConfig cfg = load(f);
    const std::string path = out_path(f, cfg);
    const nlohmann::json report = probe_scdp_convexity(cfg, cfg.oracle_step.value_or(kDefaultProbeStep));
    if (!emit(path, report.dump(2) + '\n')) return io_failure(path);
    return kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classification-distortion-perception tradeoff surfaces"};
    app.require_subcommand(1);
    Flags flags;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "JSON problem configuration")->required();
        sub->add_option("--out", flags.out, "output file (defaults to the config's \"output\", else stdout)");
        sub->add_option("--seed", flags.seed, "override the config seed");
    };
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "solve C and/or C_S over the configured grid");
    common(sweep_cmd);
    sweep_cmd->add_option("--oracle-step", flags.oracle_step, "also run the lattice oracle with this step");
    sweep_cmd->add_flag("--dump-kernels", flags.dump_kernels, "write <out>.kernels.json");

    CLI::App* audit_cmd = app.add_subcommand("audit", "run the randomized property suites");
    common(audit_cmd);
    audit_cmd->add_option("--trials", flags.trials, "trials per suite")->check(CLI::PositiveNumber);

    CLI::App* probe_cmd = app.add_subcommand("probe-scdp-convexity", "midpoint-convexity scan of the oracle C_S");
    common(probe_cmd);
    probe_cmd->add_option("--oracle-step", flags.oracle_step, "lattice step (default 0.05)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kConfigError;
    }

    try {
        if (*sweep_cmd) return sweep(flags);
        if (*audit_cmd) return audit(flags);
        return probe(flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const cdp::SizeError& e) {
        std::cerr << "size error: " << e.what() << '\n';
        return kSizeError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}
