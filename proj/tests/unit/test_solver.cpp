#include <doctest.h>

#include <cmath>
#include <limits>

#include "cdp/oracle.hpp"
#include "cdp/sampling.hpp"
#include "support.hpp"

using namespace cdp;
using testing::Matrix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const DivergenceKind kAll[] = {DivergenceKind::total_variation(), DivergenceKind::kullback_leibler(),
                               DivergenceKind::hellinger(), DivergenceKind::renyi(0.5), DivergenceKind::renyi(2.0)};

ProblemInstance random_instance(sampling::Rng& rng, const DivergenceKind& kind) {
    const std::size_t nx = sampling::uniform_index(rng, 2, 3), ny = sampling::uniform_index(rng, 2, 3);
    std::vector<bool> r(nx, false);
    r[sampling::uniform_index(rng, 0, nx - 1)] = true;
    return ProblemInstance(sampling::source(rng, nx), sampling::channel(rng, nx, ny), Alphabet(nx),
                           DistortionMatrix::hamming(nx), kind, DecisionRegion(r));
}

// Replays a kernel through the plain library primitives.
void check_replay(const ProblemInstance& prob, const TradeoffResult& r, bool strong) {
    REQUIRE(r.kernel);
    const MixtureSource out = push_forward(prob.observed(), *r.kernel);
    const double value = strong ? bayes_error(out) : error_rate(out, prob.classifier());
    CHECK(std::abs(value - r.value) <= 1e-10);
    CHECK(std::abs(expected_distortion(prob.source(), prob.degrade(), *r.kernel, prob.delta()) - r.achieved_distortion) <=
          1e-10);
    if (prob.perception_defined()) {
        const double d = divergence(prob.divergence(), prob.source_marginal(), out.marginal());
        CHECK(std::abs(d - r.achieved_perception) <= 1e-10);
    }
}

}  // namespace

TEST_CASE("min_distortion") {
    const MixtureSource src = testing::canonical_source();
    const auto ham = DistortionMatrix::hamming(2);
    const auto tv = DivergenceKind::total_variation();
    const DecisionRegion c0(2, {0});
    CHECK(min_distortion(ProblemInstance(src, Channel::identity(2), Alphabet(2), ham, tv, c0)) == 0.0);
    CHECK(min_distortion(testing::canonical_instance()) == doctest::Approx(0.1).epsilon(1e-14));
    const MixtureSource skewed(0.5, 0.5, ProbVector({0.9, 0.1}), ProbVector({0.5, 0.5}));
    const Channel blind = Channel::constant(2, ProbVector({0.4, 0.6}));
    CHECK(min_distortion(ProblemInstance(skewed, blind, Alphabet(2), ham, tv, c0)) == doctest::Approx(0.3));
}

TEST_CASE("unconstrained values") {
    const ProblemInstance prob = testing::canonical_instance();
    const TradeoffResult c = solve_cdp(prob, kInf, kInf);
    REQUIRE(c.status == SolveStatus::Optimal);
    CHECK(std::abs(c.value - 0.26) <= 1e-9);
    const TradeoffResult s = solve_scdp(prob, kInf, kInf);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(std::abs(s.value - 0.26) <= 1e-9);
    CHECK(s.certificate.exact);

    const ProblemInstance clean(testing::canonical_source(), Channel::identity(2), Alphabet(2),
                                DistortionMatrix::hamming(2), DivergenceKind::total_variation(), DecisionRegion(2, {0}));
    CHECK(std::abs(solve_cdp(clean, kInf, kInf).value - 0.2) <= 1e-9);
    CHECK(std::abs(solve_scdp(clean, kInf, kInf).value - 0.2) <= 1e-9);
}

TEST_CASE("infeasibility and argument checks") {
    const ProblemInstance prob = testing::canonical_instance();
    const TradeoffResult r = solve_cdp(prob, 0.05, kInf);
    CHECK(r.status == SolveStatus::Infeasible);
    CHECK(r.reason == InfeasibleReason::Distortion);
    CHECK(std::isnan(r.value));
    CHECK_FALSE(r.kernel);
    CHECK(solve_scdp(prob, 0.05, 0.3).status == SolveStatus::Infeasible);
    CHECK_THROWS_AS(solve_cdp(prob, -1.0, kInf), std::invalid_argument);
    CHECK_THROWS_AS(solve_cdp(prob, NAN, kInf), std::invalid_argument);

    // Distortion and perception are each satisfiable alone but not together.
    const ProblemInstance small = testing::small_instance();
    const double d0 = min_distortion(small);
    CHECK(solve_cdp(small, d0, kInf).status == SolveStatus::Optimal);
    CHECK(solve_cdp(small, kInf, 0.0).status == SolveStatus::Optimal);
    const TradeoffResult both = solve_cdp(small, d0, 0.0);
    CHECK(both.status == SolveStatus::Infeasible);
    CHECK(both.reason == InfeasibleReason::Perception);
}

TEST_CASE("pinned marginal at zero perception") {
    for (const auto& k : kAll) {
        const ProblemInstance prob = testing::small_instance(k);
        const TradeoffResult r = solve_cdp(prob, kInf, 0.0);
        REQUIRE(r.status == SolveStatus::Optimal);
        const ProbVector q = push_forward(prob.observed(), *r.kernel).marginal();
        for (std::size_t j = 0; j < q.size(); ++j) CHECK(std::abs(q[j] - prob.source_marginal()[j]) <= 1e-9);
    }
}

TEST_CASE("solver results replay through the primitives") {
    sampling::Rng rng(11);
    for (const auto& k : kAll)
        for (int t = 0; t < 8; ++t) {
            const ProblemInstance prob = random_instance(rng, k);
            const double d = min_distortion(prob) + 0.3 * sampling::uniform(rng);
            const double p = 0.2 * sampling::uniform(rng);
            const TradeoffResult c = solve_cdp(prob, d, p);
            if (c.status == SolveStatus::Optimal) check_replay(prob, c, false);
            const TradeoffResult s = solve_scdp(prob, d, p);
            if (s.status == SolveStatus::Optimal) {
                check_replay(prob, s, true);
                if (c.status == SolveStatus::Optimal) CHECK(s.value <= c.value + 1e-8);
            }
        }
}

TEST_CASE("classifier error is linear in the kernel") {
    sampling::Rng rng(12);
    for (int t = 0; t < 200; ++t) {
        const ProblemInstance prob = random_instance(rng, DivergenceKind::total_variation());
        const Channel k1 = sampling::channel(rng, prob.observed_size(), prob.restore_size());
        const Channel k2 = sampling::channel(rng, prob.observed_size(), prob.restore_size());
        const double l = sampling::uniform(rng);
        CHECK(std::abs(prob.classifier_error(k1.blend(k2, l)) - l * prob.classifier_error(k1) -
                       (1 - l) * prob.classifier_error(k2)) <= 1e-12);
    }
}

TEST_CASE("surfaces are monotone and the CDP surface is convex") {
    sampling::Rng rng(13);
    const std::vector<double> pg = {0.0, 0.05, 0.1, 0.15, 0.2};
    for (const auto& k : {DivergenceKind::total_variation(), DivergenceKind::hellinger()})
        for (int t = 0; t < 3; ++t) {
            const ProblemInstance prob = random_instance(rng, k);
            const double d0 = min_distortion(prob);
            const std::vector<double> dg = {d0, d0 + 0.1, d0 + 0.2, d0 + 0.3, d0 + 0.4};
            const SurfaceTable c = sweep_surface(prob, dg, pg, Surface::CDP);
            const SurfaceTable s = sweep_surface(prob, dg, pg, Surface::SCDP);
            auto ok = [](const TradeoffResult& r) { return r.status == SolveStatus::Optimal; };
            for (std::size_t i = 0; i < dg.size(); ++i)
                for (std::size_t j = 0; j < pg.size(); ++j) {
                    for (const SurfaceTable* tab : {&c, &s}) {
                        const auto& here = tab->at(i, j);
                        if (!ok(here)) continue;
                        if (i + 1 < dg.size() && ok(tab->at(i + 1, j))) CHECK(tab->at(i + 1, j).value <= here.value + 1e-6);
                        if (j + 1 < pg.size() && ok(tab->at(i, j + 1))) CHECK(tab->at(i, j + 1).value <= here.value + 1e-6);
                    }
                    if (ok(c.at(i, j)) && ok(s.at(i, j))) CHECK(s.at(i, j).value <= c.at(i, j).value + 1e-8);
                    // Midpoint along each axis and the diagonal.
                    if (i + 2 < dg.size() && j + 2 < pg.size()) {
                        const auto &a = c.at(i, j), &m = c.at(i + 1, j + 1), &b = c.at(i + 2, j + 2);
                        if (ok(a) && ok(m) && ok(b))
                            CHECK(m.value <= 0.5 * (a.value + b.value) + 1e-6 + m.certificate.gap);
                    }
                }
        }
}

TEST_CASE("sweep does not depend on the thread count") {
    const ProblemInstance prob = testing::small_instance(DivergenceKind::hellinger());
    const std::vector<double> dg = {0.3, 0.4, 0.5}, pg = {0.0, 0.02, 0.1};
    for (Surface w : {Surface::CDP, Surface::SCDP}) {
        const SurfaceTable a = sweep_surface(prob, dg, pg, w, {}, 1);
        const SurfaceTable b = sweep_surface(prob, dg, pg, w, {}, 3);
        REQUIRE(a.cells.size() == b.cells.size());
        for (std::size_t i = 0; i < a.cells.size(); ++i) {
            CHECK(a.cells[i].status == b.cells[i].status);
            if (a.cells[i].kernel) CHECK(*a.cells[i].kernel == *b.cells[i].kernel);
        }
    }
    const double one[] = {kInf};
    const SurfaceTable single = sweep_surface(testing::canonical_instance(), one, one, Surface::CDP);
    CHECK(single.cells.size() == 1);
    CHECK(std::abs(single.cells[0].value - 0.26) <= 1e-9);
    const double descending[] = {0.3, 0.2};
    CHECK_THROWS(sweep_surface(prob, descending, one, Surface::CDP));
}

TEST_CASE("strong surface matches the lattice oracle") {
    const ProblemInstance prob = testing::small_instance();
    const oracle::KernelGrid grid(Alphabet(2), Alphabet(2), 0.05);
    const TradeoffResult s = solve_scdp(prob, 0.3, 0.1);
    const oracle::OracleResult o = oracle::grid_search_scdp(prob, 0.3, 0.1, grid);
    REQUIRE(s.status == SolveStatus::Optimal);
    REQUIRE(o.feasible);
    CHECK(std::abs(s.value - o.value) <= 0.05);
    CHECK(s.value <= o.value + 1e-9);
    CHECK(s.value >= o.value - o.slack);
}
