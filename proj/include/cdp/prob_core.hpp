#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cdp/errors.hpp"

namespace cdp {

/// Tolerance on the total mass of a stored distribution.
inline constexpr double kMassTolerance = 1e-12;
/// Drift below this is treated as rounding noise and renormalized away.
inline constexpr double kRenormalizeLimit = 1e-9;

/// Finite alphabet with dense symbol indices 0..size-1.
class Alphabet {
public:
    explicit Alphabet(std::size_t size);

    std::size_t size() const noexcept { return size_; }

    friend bool operator==(Alphabet, Alphabet) = default;

private:
    std::size_t size_;
};

/// Probability mass function over an alphabet.
///
/// Construction rejects negative or non-finite entries and totals that drift
/// from 1 by more than kRenormalizeLimit; smaller drift is renormalized.
class ProbVector {
public:
    explicit ProbVector(std::vector<double> mass);

    static ProbVector uniform(std::size_t size);
    static ProbVector point_mass(std::size_t size, std::size_t symbol);

    Alphabet alphabet() const noexcept { return Alphabet(mass_.size()); }
    std::size_t size() const noexcept { return mass_.size(); }
    double operator[](std::size_t i) const { return mass_[i]; }
    std::span<const double> mass() const noexcept { return mass_; }

    /// Entrywise lambda*this + (1-lambda)*other.
    ProbVector blend(const ProbVector& other, double lambda) const;

    bool operator==(const ProbVector&) const = default;

private:
    std::vector<double> mass_;
};

/// Row-stochastic conditional mass function p(out | in).
class Channel {
public:
    Channel(Alphabet input, Alphabet output, std::vector<double> row_major);
    explicit Channel(const std::vector<std::vector<double>>& rows);

    static Channel identity(std::size_t size);
    /// Every input maps to the same output distribution.
    static Channel constant(std::size_t input_size, const ProbVector& row);
    /// Input i maps surely to output target[i].
    static Channel deterministic(std::size_t output_size, std::span<const std::size_t> target);
    static Channel binary_symmetric(double flip);

    Alphabet input() const noexcept { return Alphabet(inputs_); }
    Alphabet output() const noexcept { return Alphabet(outputs_); }
    double operator()(std::size_t in, std::size_t out) const { return entries_[in * outputs_ + out]; }
    std::span<const double> row(std::size_t in) const;
    std::span<const double> entries() const noexcept { return entries_; }

    /// Distribution of the output when the input is distributed as p.
    ProbVector apply(const ProbVector& p) const;
    /// Row-wise lambda*this + (1-lambda)*other.
    Channel blend(const Channel& other, double lambda) const;

    bool operator==(const Channel&) const = default;

private:
    std::size_t inputs_;
    std::size_t outputs_;
    std::vector<double> entries_;
};

/// Two-class source: priors (P1, P2) and one class-conditional mass per class.
class MixtureSource {
public:
    MixtureSource(double prior1, double prior2, ProbVector class1, ProbVector class2);

    Alphabet alphabet() const noexcept { return class1_.alphabet(); }
    double prior1() const noexcept { return prior1_; }
    double prior2() const noexcept { return prior2_; }
    const ProbVector& class1() const noexcept { return class1_; }
    const ProbVector& class2() const noexcept { return class2_; }

    /// P1*class1 + P2*class2.
    ProbVector marginal() const;

    bool operator==(const MixtureSource&) const = default;

private:
    double prior1_;
    double prior2_;
    ProbVector class1_;
    ProbVector class2_;
};

/// Per-class pushforward of a source through a channel; priors are kept.
MixtureSource push_forward(const MixtureSource& src, const Channel& ch);

/// Channel x -> z obtained by running first then second.
Channel compose(const Channel& first, const Channel& second);

/// Blends class-conditionals of two mixtures sharing alphabet and priors.
MixtureSource mix_mixtures(const MixtureSource& u, const MixtureSource& v, double lambda);

}  // namespace cdp
