#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "cdp/prob_core.hpp"

namespace cdp {

/// Tie tolerance used when splitting an alphabet into strict regions.
inline constexpr double kTieTolerance = 1e-12;

/// Decision region R of a binary classifier: symbols in R are called class 1,
/// all others class 2. Empty and full regions are legal.
class DecisionRegion {
public:
    explicit DecisionRegion(std::vector<bool> members);
    DecisionRegion(std::size_t size, std::initializer_list<std::size_t> symbols);

    static DecisionRegion empty(std::size_t size);
    static DecisionRegion full(std::size_t size);
    /// Region whose membership is bit i of mask (size <= 63).
    static DecisionRegion from_mask(std::size_t size, unsigned long long mask);

    Alphabet alphabet() const noexcept { return Alphabet(members_.size()); }
    std::size_t size() const noexcept { return members_.size(); }
    bool contains(std::size_t symbol) const { return members_.at(symbol); }
    std::size_t count() const noexcept;
    /// True when both class labels are actually produced.
    bool is_proper() const noexcept { return count() != 0 && count() != size(); }
    DecisionRegion complement() const;
    std::vector<std::size_t> symbols() const;

    bool operator==(const DecisionRegion&) const = default;

private:
    std::vector<bool> members_;
};

/// Sign split of P1*p1(x) - P2*p2(x): positive, negative and tied symbols.
struct RegionPartition {
    DecisionRegion plus;
    DecisionRegion minus;
    DecisionRegion zero;
};

/// Error of classifying src with region: P2*sum_{R} p2 + P1*sum_{not R} p1.
double error_rate(const MixtureSource& src, const DecisionRegion& region);

/// Bayes region {x : P1 p1(x) >= P2 p2(x)}; ties go to class 1.
DecisionRegion bayes_region(const MixtureSource& src);

RegionPartition region_partition(const MixtureSource& src);

/// Bayes error rate, sum_x min(P1 p1(x), P2 p2(x)).
double bayes_error(const MixtureSource& src);

/// Bayes error rate through its second closed form, 1/2 - 1/2 sum_x |P1 p1(x) - P2 p2(x)|.
double bayes_error_l1_form(const MixtureSource& src);

/// True iff no output symbol is reachable from both a strictly-class-1 and a
/// strictly-class-2 input. Exactly the channels that keep the Bayes error.
bool dpi_equality_holds(const MixtureSource& src, const Channel& ch);

}  // namespace cdp
