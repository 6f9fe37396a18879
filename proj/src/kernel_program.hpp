#pragma once

// Linear objectives over restoration kernels under the distortion and
// perception budgets. Shared by the CDP and SCDP solvers.

#include <span>
#include <string>
#include <vector>

#include "cdp/solver.hpp"

namespace cdp::detail {

struct EngineResult {
    SolveStatus status = SolveStatus::Infeasible;
    InfeasibleReason reason = InfeasibleReason::None;
    std::vector<double> kernel;  // row-major |Y| x |Xhat|, rows exactly stochastic
    double objective = 0.0;
    double gap = 0.0;
    std::size_t iterations = 0;
    std::string method;
    std::string note;
};

/// Restored marginal p_Xhat for a row-major kernel.
std::vector<double> restored_marginal(const ProblemInstance& prob, std::span<const double> kernel);

/// Kernel sending each y to the first minimizer of its row of `cost`.
std::vector<double> row_argmin_kernel(std::span<const double> cost, std::size_t rows, std::size_t cols);

/// minimize cost . K over kernels K with E[Delta] <= max_distortion and
/// d(p_X, p_Xhat) <= max_perception (infinite budgets are dropped).
EngineResult minimize_linear(const ProblemInstance& prob, std::span<const double> cost, double max_distortion,
                             double max_perception, const SolverOptions& options);

/// Cheap lower bound on minimize_linear: the smooth perception ball is
/// replaced by the total-variation ball that contains it. +infinity when even
/// the relaxation is infeasible.
double relaxed_lower_bound(const ProblemInstance& prob, std::span<const double> cost, double max_distortion,
                           double max_perception);

Channel to_channel(const ProblemInstance& prob, std::vector<double> kernel);

}  // namespace cdp::detail
