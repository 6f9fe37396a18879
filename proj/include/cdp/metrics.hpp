#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdp/prob_core.hpp"

namespace cdp {

/// Perceptual-difference measure d(p, q) between two mass functions.
///
/// All four kinds are convex in q. Total variation uses the half-sum
/// convention (range [0,1]); KL and Renyi are in nats; Hellinger is the
/// squared distance 1/2 sum (sqrt p - sqrt q)^2.
class DivergenceKind {
public:
    enum class Kind { TotalVariation, KullbackLeibler, Hellinger, RenyiAlpha };

    static DivergenceKind total_variation() { return DivergenceKind(Kind::TotalVariation, std::nullopt); }
    static DivergenceKind kullback_leibler() { return DivergenceKind(Kind::KullbackLeibler, std::nullopt); }
    static DivergenceKind hellinger() { return DivergenceKind(Kind::Hellinger, std::nullopt); }
    /// Throws std::invalid_argument unless alpha > 0 and alpha != 1.
    static DivergenceKind renyi(double alpha);

    Kind kind() const noexcept { return kind_; }
    /// Order of the Renyi divergence; present iff kind() == RenyiAlpha.
    std::optional<double> alpha() const noexcept { return alpha_; }
    std::string name() const;

    bool operator==(const DivergenceKind&) const = default;

private:
    DivergenceKind(Kind k, std::optional<double> a) : kind_(k), alpha_(a) {}

    Kind kind_;
    std::optional<double> alpha_;
};

/// Cost matrix Delta(x, xhat) >= 0 between a source and a restoration alphabet.
class DistortionMatrix {
public:
    DistortionMatrix(Alphabet from, Alphabet to, std::vector<double> row_major);
    explicit DistortionMatrix(const std::vector<std::vector<double>>& rows);

    /// 0 on the diagonal, 1 elsewhere.
    static DistortionMatrix hamming(std::size_t size);
    /// (x - xhat)^2 on symbol indices.
    static DistortionMatrix squared_error(std::size_t size);

    Alphabet from() const noexcept { return Alphabet(from_); }
    Alphabet to() const noexcept { return Alphabet(to_); }
    double operator()(std::size_t x, std::size_t xhat) const { return cost_[x * to_ + xhat]; }
    std::span<const double> entries() const noexcept { return cost_; }

private:
    std::size_t from_;
    std::size_t to_;
    std::vector<double> cost_;
};

/// d(p, q); +infinity when q misses support that the divergence needs.
double divergence(const DivergenceKind& kind, const ProbVector& p, const ProbVector& q);

/// Same as divergence() on raw mass vectors (no normalization check).
double divergence(const DivergenceKind& kind, std::span<const double> p, std::span<const double> q);

/// Gradient of q -> d(p, q) for the smooth kinds (KL, Hellinger, Renyi).
/// Entries where p_j > 0 and q_j = 0 come out as -infinity.
/// Throws std::invalid_argument for total variation.
std::vector<double> divergence_gradient(const DivergenceKind& kind, std::span<const double> p,
                                        std::span<const double> q);

/// Largest total variation distance compatible with d(p, q) <= budget, from
/// Pinsker-type inequalities (Le Cam for Hellinger, Gilardoni for Renyi
/// orders below 1). Always in [0, 1].
double total_variation_radius(const DivergenceKind& kind, double budget);

/// E[Delta(X, Xhat)] for the pipeline X -> degrade -> Y -> restore -> Xhat.
double expected_distortion(const MixtureSource& src, const Channel& degrade, const Channel& restore,
                           const DistortionMatrix& delta);

}  // namespace cdp
