#pragma once

// Seeded random probability objects. Only raw 64-bit outputs of
// std::mt19937_64 are used, so sequences are identical on every toolchain.

#include <cstdint>
#include <random>

#include "cdp/classify.hpp"
#include "cdp/prob_core.hpp"

namespace cdp::sampling {

using Rng = std::mt19937_64;

/// Uniform in [0, 1).
double uniform(Rng& rng);
/// Uniform integer in [lo, hi].
std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi);

/// Flat Dirichlet draw.
ProbVector prob_vector(Rng& rng, std::size_t size);
/// Like prob_vector but each entry is zeroed with probability `sparsity`
/// (at least one entry survives).
ProbVector sparse_prob_vector(Rng& rng, std::size_t size, double sparsity);
Channel channel(Rng& rng, std::size_t inputs, std::size_t outputs);
/// Random priors in [0.05, 0.95] and Dirichlet class-conditionals.
MixtureSource source(Rng& rng, std::size_t size);
DecisionRegion region(Rng& rng, std::size_t size);
/// Uniformly random permutation channel.
Channel permutation(Rng& rng, std::size_t size);

}  // namespace cdp::sampling
