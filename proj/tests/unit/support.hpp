#pragma once

// Shared fixtures and independent reference computations. The references are
// plain loops over the defining sums and never call the library routine they
// are checked against.

#include <cmath>
#include <cstddef>
#include <vector>

#include "cdp/classify.hpp"
#include "cdp/metrics.hpp"
#include "cdp/prob_core.hpp"
#include "cdp/solver.hpp"

namespace testing {

using Matrix = std::vector<std::vector<double>>;

inline cdp::MixtureSource canonical_source() {
    return cdp::MixtureSource(0.5, 0.5, cdp::ProbVector({0.8, 0.2}), cdp::ProbVector({0.2, 0.8}));
}

inline cdp::ProblemInstance canonical_instance(cdp::DivergenceKind kind = cdp::DivergenceKind::total_variation()) {
    return cdp::ProblemInstance(canonical_source(), cdp::Channel::binary_symmetric(0.1), cdp::Alphabet(2),
                                cdp::DistortionMatrix::hamming(2), kind, cdp::DecisionRegion(2, {0}));
}

// The 2x2x2 instance used for solver-versus-lattice comparisons.
inline cdp::ProblemInstance small_instance(cdp::DivergenceKind kind = cdp::DivergenceKind::total_variation()) {
    return cdp::ProblemInstance(cdp::MixtureSource(0.6, 0.4, cdp::ProbVector({0.7, 0.3}), cdp::ProbVector({0.25, 0.75})),
                                cdp::Channel(Matrix{{0.8, 0.2}, {0.3, 0.7}}), cdp::Alphabet(2),
                                cdp::DistortionMatrix::hamming(2), kind, cdp::DecisionRegion(2, {1}));
}

inline std::vector<double> ref_apply(const std::vector<double>& p, const cdp::Channel& ch) {
    std::vector<double> out(ch.output().size(), 0.0);
    for (std::size_t x = 0; x < p.size(); ++x)
        for (std::size_t y = 0; y < out.size(); ++y) out[y] += p[x] * ch(x, y);
    return out;
}

inline std::vector<double> vec(const cdp::ProbVector& p) { return {p.mass().begin(), p.mass().end()}; }

// P1 * P(x not in R | class 1) + P2 * P(x in R | class 2).
inline double ref_error_rate(const cdp::MixtureSource& s, const cdp::DecisionRegion& r) {
    double e = 0.0;
    for (std::size_t x = 0; x < s.alphabet().size(); ++x)
        e += r.contains(x) ? s.prior2() * s.class2()[x] : s.prior1() * s.class1()[x];
    return e;
}

// Bayes error by exhaustive minimum over all regions.
inline double ref_bayes_error(const cdp::MixtureSource& s) {
    const std::size_t n = s.alphabet().size();
    double best = 1.0;
    for (unsigned long long m = 0; m < (1ULL << n); ++m) {
        std::vector<bool> members(n);
        for (std::size_t i = 0; i < n; ++i) members[i] = (m >> i) & 1ULL;
        best = std::min(best, ref_error_rate(s, cdp::DecisionRegion(members)));
    }
    return best;
}

inline double ref_expected_distortion(const cdp::MixtureSource& s, const cdp::Channel& deg, const cdp::Channel& res,
                                      const cdp::DistortionMatrix& d) {
    const auto px = vec(s.marginal());
    double e = 0.0;
    for (std::size_t x = 0; x < px.size(); ++x)
        for (std::size_t y = 0; y < deg.output().size(); ++y)
            for (std::size_t z = 0; z < res.output().size(); ++z) e += px[x] * deg(x, y) * res(y, z) * d(x, z);
    return e;
}

}  // namespace testing
