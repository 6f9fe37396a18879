#include <doctest.h>

#include <cmath>
#include <limits>

#include "cdp/sampling.hpp"
#include "support.hpp"

using namespace cdp;
using testing::Matrix;

namespace {

const DivergenceKind kAll[] = {DivergenceKind::total_variation(), DivergenceKind::kullback_leibler(),
                               DivergenceKind::hellinger(), DivergenceKind::renyi(0.5), DivergenceKind::renyi(3.0)};

// Reference values straight from the defining sums.
double ref_divergence(const DivergenceKind& k, const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    switch (k.kind()) {
        case DivergenceKind::Kind::TotalVariation:
            for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
            return s / 2;
        case DivergenceKind::Kind::KullbackLeibler:
            for (std::size_t i = 0; i < p.size(); ++i)
                if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
            return s;
        case DivergenceKind::Kind::Hellinger:
            for (std::size_t i = 0; i < p.size(); ++i) s += std::pow(std::sqrt(p[i]) - std::sqrt(q[i]), 2);
            return s / 2;
        case DivergenceKind::Kind::RenyiAlpha: {
            const double a = *k.alpha();
            for (std::size_t i = 0; i < p.size(); ++i)
                if (p[i] > 0) s += std::pow(p[i], a) * std::pow(q[i], 1 - a);
            return std::log(s) / (a - 1);
        }
    }
    return NAN;
}

}  // namespace

TEST_CASE("divergence examples") {
    const ProbVector p({0.2, 0.5, 0.3});
    for (const auto& k : kAll) CHECK(divergence(k, p, p) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(divergence(DivergenceKind::total_variation(), ProbVector({1, 0}), ProbVector({0, 1})) == 1.0);
    CHECK(divergence(DivergenceKind::kullback_leibler(), ProbVector({0.5, 0.5}), ProbVector({0.25, 0.75})) ==
          doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-14));
    CHECK(divergence(DivergenceKind::kullback_leibler(), ProbVector({0.5, 0.5}), ProbVector({1, 0})) ==
          std::numeric_limits<double>::infinity());
    CHECK(divergence(DivergenceKind::hellinger(), ProbVector({1, 0}), ProbVector({0, 1})) == doctest::Approx(1.0));
    CHECK_THROWS_AS(divergence(DivergenceKind::hellinger(), p, ProbVector({0.5, 0.5})), DimensionError);
    CHECK_THROWS(DivergenceKind::renyi(1.0));
    CHECK_THROWS(DivergenceKind::renyi(-2.0));
    CHECK(DivergenceKind::renyi(2.0).name() == "renyi");
}

TEST_CASE("divergence matches the defining sums") {
    sampling::Rng rng(7);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = sampling::uniform_index(rng, 2, 6);
        const ProbVector p = sampling::prob_vector(rng, n), q = sampling::prob_vector(rng, n);
        for (const auto& k : kAll)
            CHECK(divergence(k, p, q) == doctest::Approx(ref_divergence(k, testing::vec(p), testing::vec(q))).epsilon(1e-10));
    }
}

TEST_CASE("divergence is convex in its second argument") {
    sampling::Rng rng(8);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = sampling::uniform_index(rng, 2, 6);
        const ProbVector p = sampling::prob_vector(rng, n), q1 = sampling::sparse_prob_vector(rng, n, 0.2),
                         q2 = sampling::prob_vector(rng, n);
        const double l = sampling::uniform(rng);
        for (const auto& k : kAll) {
            const double lhs = divergence(k, p, q1.blend(q2, l));
            const double rhs = l * divergence(k, p, q1) + (1 - l) * divergence(k, p, q2);
            if (std::isfinite(lhs) && std::isfinite(rhs)) CHECK(lhs <= rhs + 1e-12);
        }
    }
}

TEST_CASE("divergence gradient agrees with finite differences") {
    sampling::Rng rng(9);
    const DivergenceKind smooth[] = {DivergenceKind::kullback_leibler(), DivergenceKind::hellinger(),
                                     DivergenceKind::renyi(0.5), DivergenceKind::renyi(2.5)};
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = sampling::uniform_index(rng, 2, 5);
        const auto p = testing::vec(sampling::prob_vector(rng, n));
        auto q = testing::vec(sampling::prob_vector(rng, n));
        for (auto& v : q) v = 0.5 * v + 0.5 / static_cast<double>(n);
        for (const auto& k : smooth) {
            const auto g = divergence_gradient(k, p, q);
            for (std::size_t j = 0; j < n; ++j) {
                auto up = q, down = q;
                const double h = 1e-6;
                up[j] += h;
                down[j] -= h;
                const double fd = (divergence(k, p, up) - divergence(k, p, down)) / (2 * h);
                CHECK(g[j] == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
    CHECK_THROWS(divergence_gradient(DivergenceKind::total_variation(), std::vector<double>{0.5, 0.5},
                                     std::vector<double>{0.5, 0.5}));
}

TEST_CASE("total variation radius covers every pair inside the ball") {
    sampling::Rng rng(14);
    for (const auto& k : kAll) {
        CHECK(total_variation_radius(k, 0.0) == 0.0);
        CHECK(total_variation_radius(k, std::numeric_limits<double>::infinity()) == 1.0);
        for (int t = 0; t < 300; ++t) {
            const std::size_t n = sampling::uniform_index(rng, 2, 6);
            const ProbVector p = sampling::prob_vector(rng, n);
            const ProbVector q = t % 3 == 0 ? sampling::sparse_prob_vector(rng, n, 0.4) : sampling::prob_vector(rng, n);
            const double d = ref_divergence(k, testing::vec(p), testing::vec(q));
            if (!std::isfinite(d)) continue;
            const double tv = ref_divergence(DivergenceKind::total_variation(), testing::vec(p), testing::vec(q));
            CHECK(tv <= total_variation_radius(k, d) + 1e-12);
        }
    }
}

TEST_CASE("expected_distortion") {
    const MixtureSource src = testing::canonical_source();
    const DistortionMatrix ham = DistortionMatrix::hamming(2);
    CHECK(expected_distortion(src, Channel::identity(2), Channel::identity(2), ham) == 0.0);
    CHECK(expected_distortion(src, Channel::binary_symmetric(0.1), Channel::identity(2), ham) ==
          doctest::Approx(0.1).epsilon(1e-14));
    const Channel to_zero = Channel::constant(2, ProbVector::point_mass(2, 0));
    CHECK(expected_distortion(src, Channel::binary_symmetric(0.1), to_zero, ham) ==
          doctest::Approx(src.marginal()[1]));
    CHECK_THROWS_AS(expected_distortion(src, Channel::identity(2), Channel::identity(3), ham), DimensionError);
    CHECK_THROWS(DistortionMatrix(Matrix{{0, -1}, {1, 0}}));
}

TEST_CASE("expected_distortion is linear in the restoration") {
    sampling::Rng rng(10);
    for (int t = 0; t < 500; ++t) {
        const std::size_t nx = sampling::uniform_index(rng, 1, 5), ny = sampling::uniform_index(rng, 1, 5),
                          nz = sampling::uniform_index(rng, 1, 5);
        const MixtureSource s = sampling::source(rng, nx);
        const Channel deg = sampling::channel(rng, nx, ny);
        const Channel k1 = sampling::channel(rng, ny, nz), k2 = sampling::channel(rng, ny, nz);
        std::vector<double> cost(nx * nz);
        for (auto& c : cost) c = 3 * sampling::uniform(rng);
        const DistortionMatrix d(Alphabet(nx), Alphabet(nz), cost);
        const double l = sampling::uniform(rng);
        const double e1 = expected_distortion(s, deg, k1, d), e2 = expected_distortion(s, deg, k2, d);
        CHECK(std::abs(expected_distortion(s, deg, k1.blend(k2, l), d) - l * e1 - (1 - l) * e2) <= 1e-12);
        CHECK(std::abs(e1 - testing::ref_expected_distortion(s, deg, k1, d)) <= 1e-12);
    }
}
