#include <algorithm>
#include <cmath>
#include <limits>

#include "cdp/classify.hpp"
#include "cdp/metrics.hpp"
#include "cdp/sampling.hpp"
#include "commands.hpp"

namespace cdp::cli {

namespace {

using nlohmann::json;
using sampling::Rng;

constexpr double kExactTolerance = 1e-12;
constexpr double kSurfaceTolerance = 1e-6;
constexpr double kIdentityTolerance = 1e-9;
// Surface suites solve whole grids, so they run on fewer random instances.
constexpr std::size_t kMaxCdpInstances = 20;
constexpr std::size_t kMaxScdpInstances = 5;
constexpr std::size_t kMaxRegionTrials = 200;

struct Tracker {
    PropertyReport report;

    Tracker(std::string name, std::string statement, double tolerance) {
        report.name = std::move(name);
        report.statement = std::move(statement);
        report.tolerance = tolerance;
    }
    void observe(double violation) {
        ++report.trials;
        if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
        report.max_violation = std::max(report.max_violation, violation);
    }
    PropertyReport done() {
        report.pass = report.max_violation <= report.tolerance;
        return report;
    }
};

bool optimal(const TradeoffResult& r) { return r.status == SolveStatus::Optimal; }

// Largest increase between neighbouring Optimal cells along either axis.
double monotone_violation(const SurfaceTable& t) {
    double worst = 0.0;
    for (std::size_t i = 0; i < t.d_grid.size(); ++i)
        for (std::size_t k = 0; k < t.p_grid.size(); ++k) {
            const auto& c = t.at(i, k);
            if (!optimal(c)) continue;
            if (i + 1 < t.d_grid.size() && optimal(t.at(i + 1, k)))
                worst = std::max(worst, t.at(i + 1, k).value - c.value);
            if (k + 1 < t.p_grid.size() && optimal(t.at(i, k + 1)))
                worst = std::max(worst, t.at(i, k + 1).value - c.value);
        }
    return worst;
}

// Largest C(mid) - (C(a) + C(b)) / 2 over grid-aligned midpoint triples.
double convexity_violation(const SurfaceTable& t) {
    const std::size_t nd = t.d_grid.size(), np = t.p_grid.size();
    auto mid_ok = [](double a, double b, double m) {
        return std::isfinite(a) && std::isfinite(b) && std::abs(m - 0.5 * (a + b)) <= 1e-12 * std::max(1.0, m);
    };
    double worst = 0.0;
    for (std::size_t a = 0; a < nd * np; ++a)
        for (std::size_t b = a + 1; b < nd * np; ++b) {
            const std::size_t ia = a / np, ka = a % np, ib = b / np, kb = b % np;
            if ((ia + ib) % 2 || (ka + kb) % 2) continue;
            const std::size_t im = (ia + ib) / 2, km = (ka + kb) / 2;
            if (!mid_ok(t.d_grid[ia], t.d_grid[ib], t.d_grid[im]) || !mid_ok(t.p_grid[ka], t.p_grid[kb], t.p_grid[km]))
                continue;
            const auto &ca = t.at(ia, ka), &cb = t.at(ib, kb), &cm = t.at(im, km);
            if (!optimal(ca) || !optimal(cb) || !optimal(cm)) continue;
            worst = std::max(worst, cm.value - 0.5 * (ca.value + cb.value));
        }
    return worst;
}

double max_gap(const SurfaceTable& t) {
    double g = 0.0;
    for (const auto& c : t.cells)
        if (optimal(c) && std::isfinite(c.certificate.gap)) g = std::max(g, c.certificate.gap);
    return g;
}

// Small random TV instance with Hamming cost and a proper classifier.
ProblemInstance random_instance(Rng& rng) {
    const std::size_t nx = sampling::uniform_index(rng, 2, 3), ny = sampling::uniform_index(rng, 2, 3);
    MixtureSource src = sampling::source(rng, nx);
    Channel ch = sampling::channel(rng, nx, ny);
    std::vector<bool> region(nx, false);
    region[sampling::uniform_index(rng, 0, nx - 1)] = true;
    return ProblemInstance(std::move(src), std::move(ch), Alphabet(nx), DistortionMatrix::hamming(nx),
                           DivergenceKind::total_variation(), DecisionRegion(std::move(region)));
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

PropertyReport surface_suite(const RunConfig& config, std::size_t trials, Surface which, Rng& rng) {
    const bool cdp = which == Surface::CDP;
    Tracker t(cdp ? "theorem1_cdp_monotone_convex" : "theorem2_scdp_monotone",
              cdp ? "C(D,P) is non-increasing in D and P and midpoint-convex on grids"
                  : "C_S(D,P) is non-increasing in D and P",
              kSurfaceTolerance);
    SolverOptions options;
    options.seed = config.seed;
    double gap_allowance = 0.0;
    auto check = [&](const ProblemInstance& prob, const std::vector<double>& dg, const std::vector<double>& pg) {
        const SurfaceTable table = sweep_surface(prob, dg, pg, which, options);
        double v = monotone_violation(table);
        if (cdp) {
            gap_allowance = std::max(gap_allowance, max_gap(table));
            v = std::max(v, convexity_violation(table));
        }
        t.observe(v);
    };
    if (config.instance.perception_defined()) check(config.instance, config.d_grid, config.p_grid);
    const std::size_t extra = std::min(trials, cdp ? kMaxCdpInstances : kMaxScdpInstances);
    for (std::size_t i = 0; i < extra; ++i) {
        const ProblemInstance prob = random_instance(rng);
        const double d0 = min_distortion(prob);
        check(prob, linspace(d0, d0 + 0.3, 4), linspace(0.0, 0.3, 4));
    }
    t.report.tolerance += gap_allowance;
    return t.done();
}

}  // namespace

std::vector<PropertyReport> run_audit(const RunConfig& config, std::size_t trials) {
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    Rng rng(config.seed);
    std::vector<PropertyReport> out;

    out.push_back(surface_suite(config, trials, Surface::CDP, rng));
    out.push_back(surface_suite(config, trials, Surface::SCDP, rng));

    {
        Tracker t("theorem3_error_rate_linearity",
                  "error_rate(mix(u,v,l), R) = l error_rate(u,R) + (1-l) error_rate(v,R)", kExactTolerance);
        for (std::size_t i = 0; i < trials; ++i) {
            const std::size_t n = sampling::uniform_index(rng, 2, 6);
            const MixtureSource u = sampling::source(rng, n);
            const MixtureSource v(u.prior1(), u.prior2(), sampling::prob_vector(rng, n), sampling::prob_vector(rng, n));
            const DecisionRegion r = sampling::region(rng, n);
            const double l = sampling::uniform(rng);
            t.observe(std::abs(error_rate(mix_mixtures(u, v, l), r) - l * error_rate(u, r) -
                               (1.0 - l) * error_rate(v, r)));
        }
        out.push_back(t.done());
    }
    {
        Tracker t("theorem4_bayes_error_concavity",
                  "bayes_error(mix(u,v,l)) >= l bayes_error(u) + (1-l) bayes_error(v)", kExactTolerance);
        for (std::size_t i = 0; i < trials; ++i) {
            const std::size_t n = sampling::uniform_index(rng, 2, 6);
            const MixtureSource u = sampling::source(rng, n);
            const MixtureSource v(u.prior1(), u.prior2(), sampling::prob_vector(rng, n), sampling::prob_vector(rng, n));
            const double l = sampling::uniform(rng);
            t.observe(l * bayes_error(u) + (1.0 - l) * bayes_error(v) - bayes_error(mix_mixtures(u, v, l)));
        }
        out.push_back(t.done());
    }
    {
        Tracker t("theorem5_bayes_error_nondecreasing",
                  "bayes_error(push_forward(X, ch)) >= bayes_error(X), with equality exactly when no output "
                  "symbol is reachable from both strict regions",
                  kExactTolerance);
        for (std::size_t i = 0; i < trials; ++i) {
            const std::size_t nx = sampling::uniform_index(rng, 2, 6), ny = sampling::uniform_index(rng, 2, 6);
            const MixtureSource src = sampling::source(rng, nx);
            // Sparse rows make the equality condition hold with useful frequency.
            std::vector<double> e;
            for (std::size_t x = 0; x < nx; ++x) {
                const ProbVector row = sampling::sparse_prob_vector(rng, ny, 0.7);
                e.insert(e.end(), row.mass().begin(), row.mass().end());
            }
            const Channel ch(Alphabet(nx), Alphabet(ny), std::move(e));
            const double ex = bayes_error(src), ey = bayes_error(push_forward(src, ch));
            double v = ex - ey;
            if (dpi_equality_holds(src, ch))
                v = std::max(v, std::abs(ey - ex));
            else if (!region_partition(src).zero.count())
                // Bridged outputs lose at least this much; fail if the loss vanishes.
                v = std::max(v, ey - ex > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            t.observe(v);
        }
        out.push_back(t.done());
    }
    {
        Tracker t("eq6_bayes_error_dual_form", "sum min(P1 p1, P2 p2) = 1/2 - 1/2 sum |P1 p1 - P2 p2|",
                  kExactTolerance);
        for (std::size_t i = 0; i < trials; ++i) {
            const MixtureSource src = sampling::source(rng, sampling::uniform_index(rng, 2, 6));
            t.observe(std::abs(bayes_error(src) - bayes_error_l1_form(src)));
        }
        out.push_back(t.done());
    }
    {
        Tracker t("bayes_region_optimality", "error_rate(X, R) >= bayes_error(X) for every region R", kExactTolerance);
        for (std::size_t i = 0; i < std::min(trials, kMaxRegionTrials); ++i) {
            const std::size_t n = sampling::uniform_index(rng, 2, 8);
            const MixtureSource src = sampling::source(rng, n);
            const double be = bayes_error(src);
            double v = std::abs(error_rate(src, bayes_region(src)) - be);
            for (unsigned long long m = 0; m < (1ULL << n); ++m)
                v = std::max(v, be - error_rate(src, DecisionRegion::from_mask(n, m)));
            t.observe(v);
        }
        out.push_back(t.done());
    }
    {
        Tracker t("divergence_convexity", "d(p, l q1 + (1-l) q2) <= l d(p,q1) + (1-l) d(p,q2) for all four kinds",
                  kExactTolerance);
        const DivergenceKind kinds[] = {DivergenceKind::total_variation(), DivergenceKind::kullback_leibler(),
                                        DivergenceKind::hellinger(), DivergenceKind::renyi(0.5),
                                        DivergenceKind::renyi(2.0)};
        for (std::size_t i = 0; i < trials; ++i) {
            const std::size_t n = sampling::uniform_index(rng, 2, 6);
            const ProbVector p = sampling::prob_vector(rng, n), q1 = sampling::prob_vector(rng, n),
                             q2 = sampling::prob_vector(rng, n);
            const double l = sampling::uniform(rng);
            double v = 0.0;
            for (const auto& k : kinds) {
                const double lhs = divergence(k, p, q1.blend(q2, l));
                const double rhs = l * divergence(k, p, q1) + (1.0 - l) * divergence(k, p, q2);
                if (std::isfinite(lhs) && std::isfinite(rhs)) v = std::max(v, lhs - rhs);
            }
            t.observe(v);
        }
        out.push_back(t.done());
    }
    {
        Tracker t("distortion_linearity", "E[Delta] of a blended restoration is the blend of E[Delta]",
                  kExactTolerance);
        for (std::size_t i = 0; i < trials; ++i) {
            const std::size_t nx = sampling::uniform_index(rng, 2, 5), ny = sampling::uniform_index(rng, 2, 5);
            const MixtureSource src = sampling::source(rng, nx);
            const Channel deg = sampling::channel(rng, nx, ny);
            const Channel k1 = sampling::channel(rng, ny, nx), k2 = sampling::channel(rng, ny, nx);
            const DistortionMatrix delta = DistortionMatrix::squared_error(nx);
            const double l = sampling::uniform(rng);
            t.observe(std::abs(expected_distortion(src, deg, k1.blend(k2, l), delta) -
                               l * expected_distortion(src, deg, k1, delta) -
                               (1.0 - l) * expected_distortion(src, deg, k2, delta)));
        }
        out.push_back(t.done());
    }
    {
        Tracker t("unrestored_classification_identity",
                  "C_S(inf,inf) = bayes_error(Y), and C(inf,inf) = bayes_error(Y) for a proper classifier",
                  kIdentityTolerance);
        SolverOptions options;
        options.seed = config.seed;
        constexpr double inf = std::numeric_limits<double>::infinity();
        auto check = [&](const ProblemInstance& prob) {
            const double target = bayes_error(prob.observed());
            double v = std::abs(solve_scdp(prob, inf, inf, options).value - target);
            if (prob.classifier().is_proper()) v = std::max(v, std::abs(solve_cdp(prob, inf, inf, options).value - target));
            t.observe(v);
        };
        check(config.instance);
        for (std::size_t i = 0; i < std::min(trials, kMaxCdpInstances); ++i) check(random_instance(rng));
        out.push_back(t.done());
    }
    return out;
}

json audit_report(const RunConfig& config, std::size_t trials, const std::vector<PropertyReport>& suites) {
    json list = json::array();
    bool pass = true;
    for (const auto& s : suites) {
        list.push_back({{"name", s.name},
                        {"statement", s.statement},
                        {"trials", s.trials},
                        {"max_violation", s.max_violation},
                        {"tolerance", s.tolerance},
                        {"pass", s.pass}});
        pass = pass && s.pass;
    }
    return {{"seed", config.seed}, {"trials", trials}, {"suites", list}, {"pass", pass}};
}

}  // namespace cdp::cli
