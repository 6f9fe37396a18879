#include "cdp/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cdp::lp {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kDegenerateRunBeforeBland = 64;
constexpr double kHarrisSlack = 1e-12;

// Tableau in canonical form for the current basis. Column `cols` holds the rhs.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * (cols + 1), 0.0), cost_(cols + 1, 0.0), basis_(rows, kNone),
          allowed_(cols, true) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double rhs(std::size_t r) const { return at(r, cols_); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<std::size_t>& basis() { return basis_; }
    std::vector<bool>& allowed() { return allowed_; }
    std::vector<double>& cost() { return cost_; }

    // Reduced-cost row for objective c (length cols) under the current basis.
    void price(const std::vector<double>& c) {
        for (std::size_t j = 0; j < cols_; ++j) cost_[j] = c[j];
        cost_[cols_] = 0.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            const double cb = c[basis_[r]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) cost_[j] -= cb * at(r, j);
        }
    }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t j = 0; j <= cols_; ++j) at(pr, j) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) at(r, j) -= f * at(pr, j);
            at(r, pc) = 0.0;
        }
        const double f = cost_[pc];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= cols_; ++j) cost_[j] -= f * at(pr, j);
            cost_[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    void drop_row(std::size_t r) {
        a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r * (cols_ + 1)),
                 a_.begin() + static_cast<std::ptrdiff_t>((r + 1) * (cols_ + 1)));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --rows_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> a_;
    std::vector<double> cost_;
    std::vector<std::size_t> basis_;
    std::vector<bool> allowed_;
};

// Runs primal simplex on the priced tableau. Returns Optimal, Unbounded or IterationLimit.
Status iterate(Tableau& t, const Options& opt, std::size_t& pivots) {
    std::size_t degenerate_run = 0;
    while (true) {
        if (pivots >= opt.max_pivots) return Status::IterationLimit;
        const bool bland = degenerate_run >= kDegenerateRunBeforeBland;

        std::size_t enter = kNone;
        double best = -opt.pivot_tolerance;
        for (std::size_t j = 0; j < t.cols(); ++j) {
            if (!t.allowed()[j]) continue;
            const double rc = t.cost()[j];
            if (rc < best) {
                enter = j;
                if (bland) break;
                best = rc;
            }
        }
        if (enter == kNone) return Status::Optimal;

        std::size_t leave = kNone;
        double ratio = std::numeric_limits<double>::infinity();
        if (bland) {
            for (std::size_t r = 0; r < t.rows(); ++r) {
                const double a = t.at(r, enter);
                if (a <= opt.pivot_tolerance) continue;
                const double q = std::max(t.rhs(r), 0.0) / a;
                if (q < ratio - 1e-15 || (q <= ratio + 1e-15 && leave != kNone && t.basis()[r] < t.basis()[leave])) {
                    ratio = q;
                    leave = r;
                }
            }
        } else {
            // Harris two-pass test: bound the step with a little slack, then
            // take the largest pivot among the rows that fit under the bound.
            double bound = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < t.rows(); ++r) {
                const double a = t.at(r, enter);
                if (a > opt.pivot_tolerance) bound = std::min(bound, (std::max(t.rhs(r), 0.0) + kHarrisSlack) / a);
            }
            double biggest = 0.0;
            for (std::size_t r = 0; r < t.rows(); ++r) {
                const double a = t.at(r, enter);
                if (a <= opt.pivot_tolerance || std::max(t.rhs(r), 0.0) / a > bound) continue;
                if (a > biggest) {
                    biggest = a;
                    leave = r;
                }
            }
            if (leave != kNone) ratio = std::max(t.rhs(leave), 0.0) / biggest;
        }
        if (leave == kNone) return Status::Unbounded;

        degenerate_run = ratio <= 1e-15 ? degenerate_run + 1 : 0;
        t.pivot(leave, enter);
        ++pivots;
    }
}

}  // namespace

Solution solve(const Problem& problem, const Options& opt) {
    const std::size_t n = problem.num_vars();
    const std::size_t m = problem.rows.size();
    for (const auto& row : problem.rows)
        if (row.coeffs.size() != n) throw std::invalid_argument("lp::solve: constraint width != variable count");

    // Columns: structural | slack/surplus (one per inequality) | artificial (one per row needing it).
    std::size_t n_slack = 0, n_art = 0;
    std::vector<double> sign(m, 1.0);
    std::vector<Sense> sense(m);
    for (std::size_t i = 0; i < m; ++i) {
        sense[i] = problem.rows[i].sense;
        if (problem.rows[i].rhs < 0.0) {
            sign[i] = -1.0;
            if (sense[i] == Sense::LessEqual)
                sense[i] = Sense::GreaterEqual;
            else if (sense[i] == Sense::GreaterEqual)
                sense[i] = Sense::LessEqual;
        }
        if (sense[i] != Sense::Equal) ++n_slack;
        if (sense[i] != Sense::LessEqual) ++n_art;
    }
    const std::size_t cols = n + n_slack + n_art;
    Tableau t(m, cols);

    std::size_t slack_col = n, art_col = n + n_slack;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = problem.rows[i];
        for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign[i] * row.coeffs[j];
        t.rhs(i) = sign[i] * row.rhs;
        if (sense[i] == Sense::LessEqual) {
            t.at(i, slack_col) = 1.0;
            t.basis()[i] = slack_col++;
        } else {
            if (sense[i] == Sense::GreaterEqual) t.at(i, slack_col++) = -1.0;
            t.at(i, art_col) = 1.0;
            t.basis()[i] = art_col++;
        }
    }

    Solution sol;
    const std::size_t first_art = n + n_slack;
    if (n_art > 0) {
        std::vector<double> phase1(cols, 0.0);
        for (std::size_t j = first_art; j < cols; ++j) phase1[j] = 1.0;
        t.price(phase1);
        const Status s = iterate(t, opt, sol.pivots);
        if (s == Status::IterationLimit) {
            sol.status = s;
            return sol;
        }
        double infeasibility = 0.0;
        for (std::size_t r = 0; r < t.rows(); ++r)
            if (t.basis()[r] >= first_art) infeasibility += std::max(t.rhs(r), 0.0);
        if (infeasibility > opt.feasibility_tolerance) {
            sol.status = Status::Infeasible;
            return sol;
        }
        // Drive zero-level artificials out of the basis; rows that cannot be
        // pivoted are linearly dependent and are dropped.
        for (std::size_t r = 0; r < t.rows();) {
            if (t.basis()[r] < first_art) {
                ++r;
                continue;
            }
            std::size_t pc = kNone;
            double best = opt.pivot_tolerance;
            for (std::size_t j = 0; j < first_art; ++j)
                if (std::abs(t.at(r, j)) > best) {
                    best = std::abs(t.at(r, j));
                    pc = j;
                }
            if (pc == kNone) {
                t.drop_row(r);
            } else {
                t.pivot(r, pc);
                ++sol.pivots;
                ++r;
            }
        }
        for (std::size_t j = first_art; j < cols; ++j) t.allowed()[j] = false;
    }

    std::vector<double> c(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) c[j] = problem.objective[j];
    t.price(c);
    sol.status = iterate(t, opt, sol.pivots);
    if (sol.status != Status::Optimal) return sol;

    sol.x.assign(n, 0.0);
    for (std::size_t r = 0; r < t.rows(); ++r)
        if (t.basis()[r] < n) sol.x[t.basis()[r]] = std::max(t.rhs(r), 0.0);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += problem.objective[j] * sol.x[j];
    return sol;
}

}  // namespace cdp::lp
