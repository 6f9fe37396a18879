#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdp/classify.hpp"
#include "cdp/metrics.hpp"
#include "cdp/prob_core.hpp"

namespace cdp {

/// Full input of a tradeoff query: source X, degradation X -> Y, restoration
/// alphabet, distortion cost, perception divergence and the fixed classifier
/// used by the CDP objective. Quantities derived from the pipeline are cached.
///
/// Restoration kernels are |Y| x |Xhat| channels. The CDP objective, the
/// distortion and the restored marginal are all linear in the kernel entries;
/// the coefficient tables below expose those linear forms row-major.
class ProblemInstance {
public:
    ProblemInstance(MixtureSource source, Channel degrade, Alphabet restore_alphabet, DistortionMatrix delta,
                    DivergenceKind divergence, DecisionRegion classifier);

    const MixtureSource& source() const noexcept { return source_; }
    const Channel& degrade() const noexcept { return degrade_; }
    Alphabet restore_alphabet() const noexcept { return restore_; }
    const DistortionMatrix& delta() const noexcept { return delta_; }
    const DivergenceKind& divergence() const noexcept { return divergence_; }
    const DecisionRegion& classifier() const noexcept { return classifier_; }

    /// Y as a two-class mixture.
    const MixtureSource& observed() const noexcept { return observed_; }
    const ProbVector& source_marginal() const noexcept { return source_marginal_; }
    const ProbVector& observed_marginal() const noexcept { return observed_marginal_; }

    std::size_t observed_size() const noexcept { return observed_.alphabet().size(); }
    std::size_t restore_size() const noexcept { return restore_.size(); }
    /// The perception constraint compares p_X with p_Xhat, so it needs |Xhat| == |X|.
    bool perception_defined() const noexcept { return restore_.size() == source_.alphabet().size(); }

    /// w[y][xhat] = sum_x p_X(x) p(y|x) Delta(x, xhat).
    std::span<const double> distortion_weights() const noexcept { return distortion_weights_; }
    /// Error-rate coefficients of the fixed classifier.
    std::span<const double> classifier_costs() const noexcept { return classifier_costs_; }
    /// Error-rate coefficients of an arbitrary region over Xhat.
    std::vector<double> region_costs(const DecisionRegion& region) const;

    MixtureSource restored(const Channel& kernel) const;
    double distortion(const Channel& kernel) const;
    double perception(const Channel& kernel) const;
    double classifier_error(const Channel& kernel) const;
    double restored_bayes_error(const Channel& kernel) const;

private:
    void check_kernel(const Channel& kernel) const;

    MixtureSource source_;
    Channel degrade_;
    Alphabet restore_;
    DistortionMatrix delta_;
    DivergenceKind divergence_;
    DecisionRegion classifier_;

    MixtureSource observed_;
    ProbVector source_marginal_;
    ProbVector observed_marginal_;
    std::vector<double> distortion_weights_;
    std::vector<double> classifier_costs_;
};

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

/// Which constraint emptied the feasible set.
enum class InfeasibleReason { None, Distortion, Perception, Support };

std::string to_string(SolveStatus status);
std::string to_string(InfeasibleReason reason);

struct Certificate {
    std::size_t iterations = 0;
    /// Upper minus lower bound on the optimum (0 for a simplex optimum).
    double gap = 0.0;
    std::string method;
    /// SCDP only: the value is the global minimum (up to gap), not just an upper bound.
    bool exact = false;
    std::string note;
};

struct TradeoffResult {
    /// Error rate achieved by kernel; NaN when no feasible kernel was found.
    double value = 0.0;
    std::optional<Channel> kernel;
    double achieved_distortion = 0.0;
    double achieved_perception = 0.0;
    SolveStatus status = SolveStatus::Infeasible;
    InfeasibleReason reason = InfeasibleReason::None;
    Certificate certificate;
};

/// Default multi-start seed for the SCDP search.
inline constexpr std::uint64_t kDefaultSeed = 0x9e3779b97f4a7c15ULL;

struct SolverOptions {
    /// Stopping gap for the smooth-divergence path.
    double convex_gap = 1e-6;
    std::size_t max_iterations = 10000;
    std::size_t multistart = 64;
    std::uint64_t seed = kDefaultSeed;
    /// Deterministic kernels are enumerated while |Xhat|^|Y| stays below this.
    std::size_t max_deterministic_kernels = 1000000;
    /// Classifier regions over Xhat are enumerated while |Xhat| stays below this.
    std::size_t max_region_enumeration = 10;
};

/// Smallest achievable E[Delta(X, Xhat)] over all restoration kernels.
double min_distortion(const ProblemInstance& prob);

/// C(D, P): least fixed-classifier error rate subject to the distortion and
/// perception budgets. +infinity drops a constraint. Throws
/// std::invalid_argument for negative or NaN budgets.
TradeoffResult solve_cdp(const ProblemInstance& prob, double max_distortion, double max_perception,
                         const SolverOptions& options = {});

/// C_S(D, P): least Bayes error of the restored signal under the same budgets.
///
/// The objective is concave, so the result is the best of deterministic
/// kernels, multi-start alternating classifier/kernel descent, and (for small
/// restoration alphabets) an exhaustive minimum over classifier regions. The
/// last branch is exact and sets certificate.exact.
TradeoffResult solve_scdp(const ProblemInstance& prob, double max_distortion, double max_perception,
                          const SolverOptions& options = {});

enum class Surface { CDP, SCDP };

std::string to_string(Surface which);

/// Results over a D x P grid, one row per D value.
struct SurfaceTable {
    std::vector<double> d_grid;
    std::vector<double> p_grid;
    Surface which = Surface::CDP;
    std::vector<TradeoffResult> cells;

    const TradeoffResult& at(std::size_t d_index, std::size_t p_index) const {
        return cells.at(d_index * p_grid.size() + p_index);
    }
};

/// Solves every grid cell from scratch. Cells may run on `threads` workers
/// (0 = hardware concurrency); the table does not depend on the thread count.
SurfaceTable sweep_surface(const ProblemInstance& prob, std::span<const double> d_grid,
                           std::span<const double> p_grid, Surface which, const SolverOptions& options = {},
                           unsigned threads = 1);

}  // namespace cdp
