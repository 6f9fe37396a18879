#include <doctest.h>

#include "cdp/sampling.hpp"
#include "support.hpp"

using namespace cdp;
using testing::Matrix;

TEST_CASE("prob vector validation") {
    CHECK_THROWS_AS(ProbVector({0.5, 0.6}), InvalidDistribution);
    CHECK_THROWS_AS(ProbVector({1.2, -0.2}), InvalidDistribution);
    CHECK_THROWS_AS(ProbVector({NAN, 1.0}), InvalidDistribution);
    CHECK_THROWS_AS(ProbVector(std::vector<double>{}), InvalidDistribution);

    SUBCASE("small drift is renormalized") {
        const ProbVector p({0.5, 0.5 + 5e-10});
        CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(ProbVector::uniform(4)[3] == doctest::Approx(0.25));
    CHECK(ProbVector::point_mass(3, 2)[2] == 1.0);
}

TEST_CASE("channel validation") {
    CHECK_THROWS_AS(Channel(Matrix{{0.5, 0.6}, {0.5, 0.5}}), InvalidDistribution);
    CHECK_THROWS_AS(Channel(Matrix{{0.5, 0.5}, {1.0}}), DimensionError);
    CHECK_THROWS_AS(Channel(Alphabet(2), Alphabet(2), {1, 0, 0}), DimensionError);
    const Channel bsc = Channel::binary_symmetric(0.1);
    CHECK(bsc(0, 1) == doctest::Approx(0.1));
    CHECK(bsc(1, 1) == doctest::Approx(0.9));
}

TEST_CASE("push_forward") {
    const MixtureSource src = testing::canonical_source();

    SUBCASE("identity channel leaves the source unchanged") { CHECK(push_forward(src, Channel::identity(2)) == src); }

    SUBCASE("binary symmetric channel") {
        const MixtureSource y = push_forward(src, Channel::binary_symmetric(0.1));
        CHECK(y.class1()[0] == doctest::Approx(0.74).epsilon(1e-14));
        CHECK(y.class1()[1] == doctest::Approx(0.26).epsilon(1e-14));
        CHECK(y.class2()[0] == doctest::Approx(0.26).epsilon(1e-14));
        CHECK(y.class2()[1] == doctest::Approx(0.74).epsilon(1e-14));
    }

    SUBCASE("constant channel erases class information") {
        const ProbVector q({0.3, 0.1, 0.6});
        const MixtureSource y = push_forward(src, Channel::constant(2, q));
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(y.class1()[i] == doctest::Approx(q[i]));
            CHECK(y.class2()[i] == doctest::Approx(q[i]));
        }
    }

    CHECK_THROWS_AS(push_forward(src, Channel::identity(3)), DimensionError);
}

TEST_CASE("push_forward properties on random inputs") {
    sampling::Rng rng(1);
    for (int t = 0; t < 300; ++t) {
        const std::size_t nx = sampling::uniform_index(rng, 1, 6), ny = sampling::uniform_index(rng, 1, 6);
        const MixtureSource src = sampling::source(rng, nx);
        const Channel ch = sampling::channel(rng, nx, ny);
        const MixtureSource y = push_forward(src, ch);
        CHECK(y.prior1() == src.prior1());
        CHECK(y.prior2() == src.prior2());
        const auto ref1 = testing::ref_apply(testing::vec(src.class1()), ch);
        const auto ref_m = testing::ref_apply(testing::vec(src.marginal()), ch);
        const auto m = y.marginal();
        for (std::size_t j = 0; j < ny; ++j) {
            CHECK(std::abs(y.class1()[j] - ref1[j]) <= 1e-12);
            CHECK(std::abs(m[j] - ref_m[j]) <= 1e-12);
        }
    }
}

TEST_CASE("compose") {
    const Channel bsc = Channel::binary_symmetric(0.1);
    SUBCASE("identity is neutral") {
        const Channel c = compose(Channel::identity(2), bsc);
        for (std::size_t i = 0; i < 4; ++i) CHECK(c.entries()[i] == doctest::Approx(bsc.entries()[i]));
    }
    SUBCASE("two binary symmetric channels") {
        const Channel c = compose(bsc, bsc);
        CHECK(c(0, 0) == doctest::Approx(0.82).epsilon(1e-14));
        CHECK(c(0, 1) == doctest::Approx(0.18).epsilon(1e-14));
        CHECK(c(1, 0) == doctest::Approx(0.18).epsilon(1e-14));
    }
    SUBCASE("constant second stage absorbs") {
        const ProbVector q({0.2, 0.8});
        const Channel c = compose(bsc, Channel::constant(2, q));
        CHECK(c(0, 0) == doctest::Approx(0.2));
        CHECK(c(1, 1) == doctest::Approx(0.8));
    }
    SUBCASE("associativity") {
        sampling::Rng rng(2);
        for (int t = 0; t < 200; ++t) {
            const std::size_t a = sampling::uniform_index(rng, 1, 5), b = sampling::uniform_index(rng, 1, 5),
                              c = sampling::uniform_index(rng, 1, 5), d = sampling::uniform_index(rng, 1, 5);
            const Channel f = sampling::channel(rng, a, b), g = sampling::channel(rng, b, c),
                          h = sampling::channel(rng, c, d);
            const Channel l = compose(compose(f, g), h), r = compose(f, compose(g, h));
            for (std::size_t i = 0; i < l.entries().size(); ++i) CHECK(std::abs(l.entries()[i] - r.entries()[i]) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(compose(bsc, Channel::identity(3)), DimensionError);
}

TEST_CASE("mix_mixtures") {
    const MixtureSource u(0.4, 0.6, ProbVector({1.0, 0.0}), ProbVector({0.3, 0.7}));
    const MixtureSource v(0.4, 0.6, ProbVector({0.0, 1.0}), ProbVector({0.9, 0.1}));
    CHECK(mix_mixtures(u, v, 1.0) == u);
    CHECK(mix_mixtures(u, v, 0.0) == v);
    const MixtureSource m = mix_mixtures(u, v, 0.5);
    CHECK(m.class1()[0] == doctest::Approx(0.5));
    CHECK(m.class2()[0] == doctest::Approx(0.6));

    const MixtureSource other_priors(0.5, 0.5, ProbVector({0.0, 1.0}), ProbVector({0.9, 0.1}));
    CHECK_THROWS_AS(mix_mixtures(u, other_priors, 0.5), InvalidMixture);
    CHECK_THROWS_AS(mix_mixtures(u, v, 1.5), std::invalid_argument);
}

TEST_CASE("mixture source priors") {
    CHECK_THROWS(MixtureSource(0.7, 0.7, ProbVector({1.0}), ProbVector({1.0})));
    CHECK_THROWS(MixtureSource(-0.1, 1.1, ProbVector({1.0}), ProbVector({1.0})));
    CHECK_THROWS_AS(MixtureSource(0.5, 0.5, ProbVector({1.0}), ProbVector({0.5, 0.5})), DimensionError);
}
