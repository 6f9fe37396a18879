#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cdp/oracle.hpp"

namespace cdp::cli {

namespace {

using nlohmann::json;

std::vector<Surface> surfaces(Mode mode) {
    switch (mode) {
        case Mode::Cdp: return {Surface::CDP};
        case Mode::Scdp: return {Surface::SCDP};
        case Mode::Both: return {Surface::CDP, Surface::SCDP};
    }
    return {};
}

json kernel_json(const TradeoffResult& r) {
    if (!r.kernel) return nullptr;
    json rows = json::array();
    for (std::size_t y = 0; y < r.kernel->input().size(); ++y) {
        const auto row = r.kernel->row(y);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

oracle::OracleResult run_oracle(const RunConfig& config, Surface which, double D, double P, double step) {
    const ProblemInstance& prob = config.instance;
    const oracle::KernelGrid grid(Alphabet(prob.observed_size()), prob.restore_alphabet(), step);
    return which == Surface::CDP ? oracle::grid_search_cdp(prob, D, P, grid) : oracle::grid_search_scdp(prob, D, P, grid);
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

SweepOutput run_sweep(const RunConfig& config, unsigned threads) {
    SolverOptions options;
    options.seed = config.seed;

    SweepOutput out;
    out.kernels = json::array();
    std::ostringstream csv, oracle_csv;
    csv << kSweepHeader << '\n';
    if (config.oracle_step) oracle_csv << "mode,D,P,solver_value,oracle_value,slack,consistent\n";

    for (Surface which : surfaces(config.mode)) {
        const SurfaceTable table =
            sweep_surface(config.instance, config.d_grid, config.p_grid, which, options, threads);
        for (std::size_t i = 0; i < table.d_grid.size(); ++i)
            for (std::size_t k = 0; k < table.p_grid.size(); ++k) {
                const TradeoffResult& r = table.at(i, k);
                const double D = table.d_grid[i], P = table.p_grid[k];
                const bool has_kernel = r.kernel.has_value();
                csv << to_string(which) << ',' << format_number(D) << ',' << format_number(P) << ','
                    << (has_kernel ? format_number(r.value) : "") << ',' << to_string(r.status) << ','
                    << (has_kernel ? format_number(r.achieved_distortion) : "") << ','
                    << (has_kernel ? format_number(r.achieved_perception) : "") << ',' << r.certificate.iterations
                    << '\n';
                out.kernels.push_back({{"mode", to_string(which)},
                                       {"D", budget_to_json(D)},
                                       {"P", budget_to_json(P)},
                                       {"status", to_string(r.status)},
                                       {"kernel", kernel_json(r)}});

                if (!config.oracle_step) continue;
                const oracle::OracleResult o = run_oracle(config, which, D, P, *config.oracle_step);
                std::string consistent;
                if (!o.feasible)
                    consistent = has_kernel ? "oracle-infeasible" : "yes";
                else if (!has_kernel)
                    consistent = "no";
                else if (which == Surface::CDP)
                    consistent = std::abs(r.value - o.value) <= o.slack + 1e-9 ? "yes" : "no";
                else
                    consistent = r.value <= o.value + 1e-9 && r.value >= o.value - o.slack - 1e-9 ? "yes" : "no";
                oracle_csv << to_string(which) << ',' << format_number(D) << ',' << format_number(P) << ','
                           << (has_kernel ? format_number(r.value) : "") << ','
                           << (o.feasible ? format_number(o.value) : "") << ','
                           << (o.feasible ? format_number(o.slack) : "") << ',' << consistent << '\n';
            }
    }
    out.csv = csv.str();
    out.oracle_csv = oracle_csv.str();
    return out;
}

json probe_scdp_convexity(const RunConfig& config, double oracle_step) {
    const ProblemInstance& prob = config.instance;
    constexpr std::size_t kOracleAlphabet = 3;
    if (prob.source().alphabet().size() > kOracleAlphabet || prob.observed_size() > kOracleAlphabet ||
        prob.restore_size() > kOracleAlphabet)
        throw SizeError("probe-scdp-convexity needs alphabets of at most 3 symbols");
    const oracle::KernelGrid grid(Alphabet(prob.observed_size()), prob.restore_alphabet(), oracle_step);
    if (grid.cardinality() > oracle::kMaxLatticeKernels) throw SizeError("oracle lattice too large for this step");

    const auto& dg = config.d_grid;
    const auto& pg = config.p_grid;
    std::vector<oracle::OracleResult> cells;
    json values = json::array(), slacks = json::array();
    double max_slack = 0.0;
    for (double D : dg) {
        json vrow = json::array(), srow = json::array();
        for (double P : pg) {
            cells.push_back(oracle::grid_search_scdp(prob, D, P, grid));
            const auto& c = cells.back();
            vrow.push_back(c.feasible ? json(c.value) : json(nullptr));
            srow.push_back(c.feasible ? json(c.slack) : json(nullptr));
            if (c.feasible) max_slack = std::max(max_slack, c.slack);
        }
        values.push_back(std::move(vrow));
        slacks.push_back(std::move(srow));
    }

    auto point = [&](std::size_t i, std::size_t k) { return json::array({budget_to_json(dg[i]), budget_to_json(pg[k])}); };
    auto is_mid = [](double a, double b, double m) {
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(m)) return false;
        return std::abs(m - 0.5 * (a + b)) <= 1e-9 * std::max(1.0, std::abs(m));
    };

    const std::size_t n = dg.size() * pg.size();
    json violations = json::array();
    std::size_t triples = 0;
    double max_violation = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const std::size_t ia = a / pg.size(), ka = a % pg.size(), ib = b / pg.size(), kb = b % pg.size();
            if ((ia + ib) % 2 != 0 || (ka + kb) % 2 != 0) continue;
            const std::size_t im = (ia + ib) / 2, km = (ka + kb) / 2;
            if (!is_mid(dg[ia], dg[ib], dg[im]) || !is_mid(pg[ka], pg[kb], pg[km])) continue;
            const auto &ca = cells[a], &cb = cells[b], &cm = cells[im * pg.size() + km];
            if (!ca.feasible || !cb.feasible || !cm.feasible) continue;
            ++triples;
            const double gap = cm.value - 0.5 * (ca.value + cb.value);
            max_violation = std::max(max_violation, gap);
            if (gap > cm.slack)
                violations.push_back({{"a", point(ia, ka)},
                                      {"b", point(ib, kb)},
                                      {"mid", point(im, km)},
                                      {"gap", gap},
                                      {"slack", cm.slack}});
        }

    json d = json::array(), p = json::array();
    for (double v : dg) d.push_back(budget_to_json(v));
    for (double v : pg) p.push_back(budget_to_json(v));
    return {{"grid", {{"d", d}, {"p", p}, {"step", grid.step()}, {"values", values}, {"slack", slacks}}},
            {"triples_checked", triples},
            {"violations", violations},
            {"max_violation", max_violation},
            {"lipschitz_slack", max_slack}};
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << content;
    out.flush();
    return static_cast<bool>(out);
}

}  // namespace cdp::cli
