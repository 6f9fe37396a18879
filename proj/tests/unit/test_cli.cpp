#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"

using namespace cdp;
using namespace cdp::cli;
using nlohmann::json;

namespace {

json canonical_json() {
    return json::parse(R"({
        "priors": [0.5, 0.5], "class1": [0.8, 0.2], "class2": [0.2, 0.8],
        "degradation": [[0.9, 0.1], [0.1, 0.9]], "distortion": "hamming",
        "divergence": "tv", "classifier": [0], "seed": 42
    })");
}

std::string field_of(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        out.push_back(cells);
    }
    return out;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "cdp_cli_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(CDP_TOOL) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config validation names the field") {
    json j = canonical_json();
    CHECK(field_of(j).empty());

    j["degradation"] = json::parse("[[0.9, 0.2], [0.1, 0.9]]");
    CHECK(field_of(j) == "degradation");
    j = canonical_json();
    j["class1"] = json::parse("[0.8, -0.2]");
    CHECK(field_of(j) == "class1");
    j = canonical_json();
    j["divergence"] = "wasserstein";
    CHECK(field_of(j) == "divergence");
    j = canonical_json();
    j["d_grid"] = json::parse("[0.3, 0.1]");
    CHECK(field_of(j) == "d_grid");
    j = canonical_json();
    j.erase("priors");
    CHECK(field_of(j) == "priors");
    j = canonical_json();
    j["classifier"] = json::parse("[5]");
    CHECK(field_of(j) == "classifier");

    j = canonical_json();
    j["divergence"] = json::parse(R"({"kind": "renyi", "alpha": 2})");
    j["p_grid"] = json::parse(R"([0, "inf"])");
    const RunConfig cfg = parse_config(j);
    CHECK(cfg.instance.divergence() == DivergenceKind::renyi(2));
    CHECK(std::isinf(cfg.p_grid[1]));
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.26) == "0.26000000000000001");
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(NAN).empty());
}

TEST_CASE("sweep output") {
    json j = canonical_json();
    SUBCASE("unconstrained single cell") {
        const SweepOutput out = run_sweep(parse_config(j));
        const auto r = rows(out.csv);
        REQUIRE(r.size() == 2);
        CHECK(out.csv.rfind(std::string(kSweepHeader) + "\n", 0) == 0);
        CHECK(r[1][0] == "cdp");
        CHECK(r[1][1] == "inf");
        CHECK(std::abs(std::stod(r[1][3]) - 0.26) <= 1e-9);
        CHECK(r[1][4] == "Optimal");
    }
    SUBCASE("infeasible cells leave the value empty") {
        j["d_grid"] = json::parse("[0.05, 0.2]");
        const auto r = rows(run_sweep(parse_config(j)).csv);
        REQUIRE(r.size() == 3);
        CHECK(r[1][4] == "Infeasible");
        CHECK(r[1][3].empty());
        CHECK(r[2][4] == "Optimal");
    }
    SUBCASE("both mode keeps the strong value below the fixed-classifier value") {
        j["mode"] = "both";
        j["d_grid"] = json::parse("[0.1, 0.2, 0.3]");
        j["p_grid"] = json::parse("[0, 0.1, 0.3]");
        j["class1"] = json::parse("[0.7, 0.3]");
        const auto r = rows(run_sweep(parse_config(j)).csv);
        REQUIRE(r.size() == 19);
        for (std::size_t i = 1; i <= 9; ++i) {
            CHECK(r[i][0] == "cdp");
            CHECK(r[i + 9][0] == "scdp");
            if (!r[i][3].empty() && !r[i + 9][3].empty()) CHECK(std::stod(r[i + 9][3]) <= std::stod(r[i][3]) + 1e-8);
        }
    }
}

TEST_CASE("dumped kernels replay the reported values") {
    json j = canonical_json();
    j["mode"] = "both";
    j["divergence"] = "hellinger";
    j["class1"] = json::parse("[0.7, 0.3]");
    j["d_grid"] = json::parse("[0.15, 0.3]");
    j["p_grid"] = json::parse("[0.001, 0.05]");
    const RunConfig cfg = parse_config(j);
    const SweepOutput out = run_sweep(cfg);
    const auto r = rows(out.csv);
    REQUIRE(out.kernels.size() + 1 == r.size());
    for (std::size_t i = 0; i < out.kernels.size(); ++i) {
        const json& k = out.kernels[i];
        if (k["kernel"].is_null()) continue;
        const Channel kernel(k["kernel"].get<std::vector<std::vector<double>>>());
        const MixtureSource restored = push_forward(cfg.instance.observed(), kernel);
        const double v = k["mode"] == "cdp" ? error_rate(restored, cfg.instance.classifier()) : bayes_error(restored);
        CHECK(std::abs(v - std::stod(r[i + 1][3])) <= 1e-10);
    }
}

TEST_CASE("audit report") {
    const RunConfig cfg = parse_config(canonical_json());
    const auto suites = run_audit(cfg, 1);
    const json report = audit_report(cfg, 1, suites);
    std::size_t theorems = 0;
    for (const auto& s : report["suites"])
        if (s["name"].get<std::string>().rfind("theorem", 0) == 0) ++theorems;
    CHECK(theorems == 5);
    CHECK(report["pass"] == true);

    const auto many = run_audit(cfg, 1000);
    CHECK(many[2].name == "theorem3_error_rate_linearity");
    CHECK(many[2].trials == 1000);
    CHECK(many[2].max_violation <= 1e-12);
}

TEST_CASE("convexity probe") {
    json j = canonical_json();
    SUBCASE("single point grid") {
        j["d_grid"] = json::parse("[0.2]");
        j["p_grid"] = json::parse("[0.1]");
        const json r = probe_scdp_convexity(parse_config(j), 0.05);
        for (const char* key : {"grid", "violations", "max_violation", "lipschitz_slack"}) CHECK(r.contains(key));
        CHECK(r["triples_checked"] == 0);
        CHECK(r["violations"].empty());
    }
    SUBCASE("five by five grid") {
        j["priors"] = json::parse("[0.6, 0.4]");
        j["class1"] = json::parse("[0.7, 0.3]");
        j["class2"] = json::parse("[0.25, 0.75]");
        j["degradation"] = json::parse("[[0.8, 0.2], [0.3, 0.7]]");
        j["d_grid"] = json::parse("[0.25, 0.3, 0.35, 0.4, 0.45]");
        j["p_grid"] = json::parse("[0, 0.05, 0.1, 0.15, 0.2]");
        const json r = probe_scdp_convexity(parse_config(j), 0.05);
        CHECK(r["triples_checked"].get<int>() > 0);
        for (const auto& v : r["violations"]) {
            for (const char* key : {"a", "b", "mid", "gap", "slack"}) CHECK(v.contains(key));
            CHECK(v["gap"].get<double>() > v["slack"].get<double>());
        }
    }
    SUBCASE("too large for the oracle") {
        j["class1"] = json::parse("[0.4, 0.3, 0.2, 0.1]");
        j["class2"] = json::parse("[0.1, 0.2, 0.3, 0.4]");
        j["degradation"] = "identity";
        CHECK_THROWS_AS(probe_scdp_convexity(parse_config(j), 0.5), SizeError);
    }
}

TEST_CASE("command-line exit codes") {
    const auto good = scratch("good.json");
    std::ofstream(good) << canonical_json().dump();
    json broken = canonical_json();
    broken["degradation"] = json::parse("[[0.9, 0.2], [0.1, 0.9]]");
    const auto bad = scratch("bad.json");
    std::ofstream(bad) << broken.dump();
    json big = canonical_json();
    big["class1"] = json::parse("[0.4, 0.3, 0.2, 0.1]");
    big["class2"] = json::parse("[0.1, 0.2, 0.3, 0.4]");
    big["degradation"] = "identity";
    const auto large = scratch("large.json");
    std::ofstream(large) << big.dump();

    const auto out = scratch("out.csv").string();
    CHECK(run_tool("sweep --config " + good.string() + " --out " + out) == kSuccess);
    CHECK(std::filesystem::exists(out));
    CHECK(run_tool("sweep --config " + good.string() + " --out " + out + " --dump-kernels") == kSuccess);
    CHECK(std::filesystem::exists(out + ".kernels.json"));
    CHECK(run_tool("sweep --config " + bad.string() + " --out " + out) == kConfigError);
    CHECK(run_tool("audit --config " + bad.string() + " --trials 5 --out " + out) == kConfigError);
    CHECK(run_tool("sweep --config " + good.string() + " --out /nonexistent-dir/x.csv") == kIoError);
    CHECK(run_tool("probe-scdp-convexity --config " + large.string() + " --out " + out) == kSizeError);
    CHECK(run_tool("audit --config " + good.string() + " --trials 3 --out " + out) == kSuccess);
    CHECK(run_tool("sweep --config /nonexistent-dir/none.json") == kConfigError);
}
