#pragma once

#include <cstddef>
#include <vector>

namespace cdp::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Constraint {
    std::vector<double> coeffs;  // one per variable
    Sense sense;
    double rhs;
};

/// minimize objective . x  subject to rows, x >= 0.
struct Problem {
    std::vector<double> objective;
    std::vector<Constraint> rows;

    std::size_t num_vars() const noexcept { return objective.size(); }
    void add(std::vector<double> coeffs, Sense sense, double rhs) {
        rows.push_back({std::move(coeffs), sense, rhs});
    }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t pivots = 0;
};

struct Options {
    double pivot_tolerance = 1e-11;
    double feasibility_tolerance = 1e-9;
    std::size_t max_pivots = 50000;
};

/// Dense two-phase primal simplex. Dantzig pricing, falling back to Bland's
/// rule after a run of degenerate pivots so cycling cannot occur.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace cdp::lp
