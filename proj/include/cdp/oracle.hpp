#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cdp/prob_core.hpp"
#include "cdp/solver.hpp"

namespace cdp::oracle {

/// Lattice of kernels whose entries are multiples of step = 1/divisions.
class KernelGrid {
public:
    /// Throws std::invalid_argument unless step is in (0,1] and divides 1 within 1e-12.
    KernelGrid(Alphabet input, Alphabet output, double step);

    Alphabet input() const noexcept { return input_; }
    Alphabet output() const noexcept { return output_; }
    std::size_t divisions() const noexcept { return divisions_; }
    double step() const noexcept { return 1.0 / static_cast<double>(divisions_); }
    /// Number of lattice kernels, saturating at SIZE_MAX.
    std::size_t cardinality() const noexcept;

private:
    Alphabet input_;
    Alphabet output_;
    std::size_t divisions_;
};

inline constexpr std::size_t kMaxDeterministicKernels = 1000000;
inline constexpr std::size_t kMaxLatticeKernels = 10000000;

/// All |output|^|input| deterministic channels, in odometer order (input 0 fastest).
/// Throws SizeError above kMaxDeterministicKernels.
std::vector<Channel> enumerate_deterministic_kernels(Alphabet input, Alphabet output);

/// Outcome of an exhaustive lattice search.
///
/// The lattice minimum `value` upper-bounds the true optimum. Rounding the
/// true optimizer onto the lattice moves each kernel row by at most
/// `rounding_radius` in l1, which changes the objective by at most
/// lipschitz_objective * radius and the budgets by at most distortion_relax /
/// perception_relax; hence `relaxed_value` - lipschitz_objective * radius is a
/// lower bound and `slack` = value - that lower bound.
struct OracleResult {
    bool feasible = false;
    double value = 0.0;
    std::optional<Channel> kernel;
    std::optional<double> relaxed_value;
    double rounding_radius = 0.0;
    double lipschitz_objective = 0.0;
    double distortion_relax = 0.0;
    double perception_relax = 0.0;
    double slack = 0.0;
    std::size_t evaluated = 0;
};

/// Exhaustive minimum of the fixed-classifier error over lattice kernels.
/// Throws SizeError above kMaxLatticeKernels.
OracleResult grid_search_cdp(const ProblemInstance& prob, double max_distortion, double max_perception,
                             const KernelGrid& grid);

/// Exhaustive minimum of the restored Bayes error over lattice kernels.
OracleResult grid_search_scdp(const ProblemInstance& prob, double max_distortion, double max_perception,
                              const KernelGrid& grid);

}  // namespace cdp::oracle
