#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace cdp::cli {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double as_number(const json& v) {
    if (!v.is_number()) throw std::invalid_argument("expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw std::invalid_argument("expected a finite number");
    return d;
}

std::vector<double> as_vector(const json& v) {
    if (!v.is_array() || v.empty()) throw std::invalid_argument("expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e));
    return out;
}

std::vector<std::vector<double>> as_matrix(const json& v) {
    if (!v.is_array() || v.empty()) throw std::invalid_argument("expected a non-empty array of rows");
    std::vector<std::vector<double>> out;
    for (const auto& r : v) out.push_back(as_vector(r));
    return out;
}

double as_budget(const json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return kInf;
        throw std::invalid_argument("the only accepted string is \"inf\"");
    }
    const double d = as_number(v);
    if (d < 0.0) throw std::invalid_argument("budgets must be nonnegative");
    return d;
}

std::vector<double> as_grid(const json& v) {
    if (!v.is_array() || v.empty()) throw std::invalid_argument("expected a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
        out.push_back(as_budget(e));
        if (out.size() > 1 && out.back() < out[out.size() - 2]) throw std::invalid_argument("grid must be ascending");
    }
    return out;
}

// Runs `parse` on j[name], tagging any failure with the field name.
template <class F>
auto field(const json& j, const char* name, F&& parse) {
    if (!j.contains(name)) throw ConfigError(name, "missing");
    try {
        return parse(j.at(name));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(name, e.what());
    }
}

template <class F, class T>
auto field_or(const json& j, const char* name, T fallback, F&& parse) {
    if (!j.contains(name)) return static_cast<decltype(parse(j))>(fallback);
    return field(j, name, std::forward<F>(parse));
}

DivergenceKind as_divergence(const json& v) {
    std::string kind;
    std::optional<double> alpha;
    if (v.is_string()) {
        kind = v.get<std::string>();
    } else if (v.is_object() && v.contains("kind") && v.at("kind").is_string()) {
        kind = v.at("kind").get<std::string>();
        if (v.contains("alpha")) alpha = as_number(v.at("alpha"));
    } else {
        throw std::invalid_argument("expected a kind name or {\"kind\": ..., \"alpha\": ...}");
    }
    if (kind == "tv" || kind == "total_variation") return DivergenceKind::total_variation();
    if (kind == "kl" || kind == "kullback_leibler") return DivergenceKind::kullback_leibler();
    if (kind == "hellinger") return DivergenceKind::hellinger();
    if (kind == "renyi") {
        if (!alpha) throw std::invalid_argument("renyi needs \"alpha\"");
        return DivergenceKind::renyi(*alpha);
    }
    throw std::invalid_argument("unknown divergence \"" + kind + "\"");
}

Mode as_mode(const json& v) {
    if (v == "cdp") return Mode::Cdp;
    if (v == "scdp") return Mode::Scdp;
    if (v == "both") return Mode::Both;
    throw std::invalid_argument("mode must be \"cdp\", \"scdp\" or \"both\"");
}

}  // namespace

json budget_to_json(double v) { return std::isinf(v) ? json("inf") : json(v); }

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");

    const auto priors = field(j, "priors", [](const json& v) {
        auto p = as_vector(v);
        if (p.size() != 2) throw std::invalid_argument("expected exactly two priors");
        return p;
    });
    const ProbVector class1 = field(j, "class1", [](const json& v) { return ProbVector(as_vector(v)); });
    const ProbVector class2 = field(j, "class2", [&](const json& v) {
        ProbVector c(as_vector(v));
        if (c.size() != class1.size()) throw std::invalid_argument("class2 and class1 have different lengths");
        return c;
    });
    const MixtureSource source =
        field(j, "priors", [&](const json&) { return MixtureSource(priors[0], priors[1], class1, class2); });
    const std::size_t nx = class1.size();

    const Channel degrade = field(j, "degradation", [&](const json& v) {
        if (v == "identity") return Channel::identity(nx);
        Channel c(as_matrix(v));
        if (c.input().size() != nx) throw std::invalid_argument("needs one row per source symbol");
        return c;
    });
    const std::size_t nr = field_or(j, "restore_size", nx, [](const json& v) {
        if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) throw std::invalid_argument("expected a positive integer");
        return v.get<std::size_t>();
    });
    const DistortionMatrix delta = field(j, "distortion", [&](const json& v) {
        if (v == "hamming" || v == "squared") {
            if (nr != nx) throw std::invalid_argument("named costs need restore_size == source size");
            return v == "hamming" ? DistortionMatrix::hamming(nx) : DistortionMatrix::squared_error(nx);
        }
        DistortionMatrix d(as_matrix(v));
        if (d.from().size() != nx || d.to().size() != nr)
            throw std::invalid_argument("shape must be source size x restore_size");
        return d;
    });
    const DivergenceKind divergence = field(j, "divergence", as_divergence);
    const DecisionRegion classifier = field(j, "classifier", [&](const json& v) {
        if (!v.is_array()) throw std::invalid_argument("expected an array of restored-symbol indices");
        std::vector<bool> m(nr, false);
        for (const auto& s : v) {
            if (!s.is_number_unsigned() || s.get<std::size_t>() >= nr)
                throw std::invalid_argument("indices must be integers in [0, restore_size)");
            m[s.get<std::size_t>()] = true;
        }
        return DecisionRegion(std::move(m));
    });

    RunConfig cfg{ProblemInstance(source, degrade, Alphabet(nr), delta, divergence, classifier), {}, {}, Mode::Cdp,
                  std::nullopt, kDefaultConfigSeed, {}};
    cfg.d_grid = field_or(j, "d_grid", std::vector<double>{kInf}, as_grid);
    cfg.p_grid = field_or(j, "p_grid", std::vector<double>{kInf}, as_grid);
    if (nr != nx)
        for (double p : cfg.p_grid)
            if (std::isfinite(p)) throw ConfigError("p_grid", "finite perception budgets need restore_size == source size");
    cfg.mode = field_or(j, "mode", Mode::Cdp, as_mode);
    if (j.contains("oracle_step"))
        cfg.oracle_step = field(j, "oracle_step", [](const json& v) {
            const double s = as_number(v);
            if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("step must lie in (0,1]");
            return s;
        });
    cfg.seed = field_or(j, "seed", kDefaultConfigSeed, [](const json& v) {
        if (!v.is_number_unsigned()) throw std::invalid_argument("expected an unsigned 64-bit integer");
        return v.get<std::uint64_t>();
    });
    cfg.output_path = field_or(j, "output", std::string(), [](const json& v) {
        if (!v.is_string()) throw std::invalid_argument("expected a path string");
        return v.get<std::string>();
    });
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot read " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace cdp::cli
