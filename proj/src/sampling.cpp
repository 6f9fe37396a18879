#include "cdp/sampling.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace cdp::sampling {

double uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
    const std::size_t span = hi - lo + 1;
    return lo + static_cast<std::size_t>(uniform(rng) * static_cast<double>(span)) % span;
}

ProbVector prob_vector(Rng& rng, std::size_t size) { return sparse_prob_vector(rng, size, 0.0); }

ProbVector sparse_prob_vector(Rng& rng, std::size_t size, double sparsity) {
    std::vector<double> m(size);
    double total = 0.0;
    for (double& v : m) {
        v = -std::log(1.0 - uniform(rng));
        if (uniform(rng) < sparsity) v = 0.0;
        total += v;
    }
    if (total == 0.0) {
        m[uniform_index(rng, 0, size - 1)] = 1.0;
        total = 1.0;
    }
    for (double& v : m) v /= total;
    return ProbVector(std::move(m));
}

Channel channel(Rng& rng, std::size_t inputs, std::size_t outputs) {
    std::vector<double> e;
    e.reserve(inputs * outputs);
    for (std::size_t i = 0; i < inputs; ++i) {
        const ProbVector row = prob_vector(rng, outputs);
        e.insert(e.end(), row.mass().begin(), row.mass().end());
    }
    return Channel(Alphabet(inputs), Alphabet(outputs), std::move(e));
}

MixtureSource source(Rng& rng, std::size_t size) {
    const double p1 = 0.05 + 0.9 * uniform(rng);
    ProbVector c1 = prob_vector(rng, size);
    ProbVector c2 = prob_vector(rng, size);
    return MixtureSource(p1, 1.0 - p1, std::move(c1), std::move(c2));
}

DecisionRegion region(Rng& rng, std::size_t size) {
    std::vector<bool> m(size);
    for (std::size_t i = 0; i < size; ++i) m[i] = (rng() >> 63) != 0;
    return DecisionRegion(std::move(m));
}

Channel permutation(Rng& rng, std::size_t size) {
    std::vector<std::size_t> target(size);
    std::iota(target.begin(), target.end(), std::size_t{0});
    for (std::size_t i = size; i > 1; --i) std::swap(target[i - 1], target[uniform_index(rng, 0, i - 1)]);
    return Channel::deterministic(size, target);
}

}  // namespace cdp::sampling
