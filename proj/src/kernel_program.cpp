#include "kernel_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdp/lp.hpp"

namespace cdp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDistortionSlack = 1e-12;
constexpr double kTieSlack = 1e-12;
// Once inside the perception ball, keep descending at most this long.
constexpr std::size_t kInteriorPolish = 200;
// Tangent points placed on each coordinate before the first LP, as
// multiples of p_X(j).
constexpr double kInitialTangents[] = {0.25, 0.5, 0.8, 1.0, 1.25, 2.0, 4.0};

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Clamp LP round-off and renormalize each row exactly.
void clean_rows(std::vector<double>& k, std::size_t rows, std::size_t cols) {
    for (std::size_t y = 0; y < rows; ++y) {
        double total = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            double& v = k[y * cols + j];
            if (v < 0.0) v = 0.0;
            total += v;
        }
        for (std::size_t j = 0; j < cols; ++j) k[y * cols + j] = total > 0.0 ? k[y * cols + j] / total : 1.0 / cols;
    }
}

enum class PerceptionRows { None, TotalVariation, Pinned };

lp::Problem kernel_lp(const ProblemInstance& prob, std::span<const double> cost, double max_distortion,
                      PerceptionRows mode, double max_perception) {
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size(), nk = ny * nr;
    const std::size_t n = nk + (mode == PerceptionRows::TotalVariation ? nr : 0);
    const auto p_y = prob.observed_marginal().mass();

    lp::Problem lp;
    lp.objective.assign(n, 0.0);
    std::copy(cost.begin(), cost.end(), lp.objective.begin());

    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> row(n, 0.0);
        for (std::size_t j = 0; j < nr; ++j) row[y * nr + j] = 1.0;
        lp.add(std::move(row), lp::Sense::Equal, 1.0);
    }
    if (std::isfinite(max_distortion)) {
        std::vector<double> row(n, 0.0);
        const auto w = prob.distortion_weights();
        std::copy(w.begin(), w.end(), row.begin());
        lp.add(std::move(row), lp::Sense::LessEqual, max_distortion);
    }
    // Row of p_Xhat(j) in kernel coordinates, optionally with a TV slack column.
    auto marginal_row = [&](std::size_t j, double scale) {
        std::vector<double> row(n, 0.0);
        for (std::size_t y = 0; y < ny; ++y) row[y * nr + j] = scale * p_y[y];
        return row;
    };
    if (mode != PerceptionRows::None) {
        const auto p_x = prob.source_marginal().mass();
        for (std::size_t j = 0; j < nr; ++j) {
            if (mode == PerceptionRows::Pinned) {
                lp.add(marginal_row(j, 1.0), lp::Sense::Equal, p_x[j]);
                continue;
            }
            auto upper = marginal_row(j, 1.0);
            upper[nk + j] = -1.0;
            lp.add(std::move(upper), lp::Sense::LessEqual, p_x[j]);
            auto lower = marginal_row(j, -1.0);
            lower[nk + j] = -1.0;
            lp.add(std::move(lower), lp::Sense::LessEqual, -p_x[j]);
        }
        if (mode == PerceptionRows::TotalVariation) {
            std::vector<double> row(n, 0.0);
            for (std::size_t j = 0; j < nr; ++j) row[nk + j] = 1.0;
            lp.add(std::move(row), lp::Sense::LessEqual, 2.0 * max_perception);
        }
    }
    return lp;
}

EngineResult finish(const ProblemInstance& prob, std::span<const double> cost, std::vector<double> kernel,
                    SolveStatus status, std::size_t iterations, std::string method) {
    EngineResult r;
    clean_rows(kernel, prob.observed_size(), prob.restore_size());
    r.objective = dot(cost, kernel);
    r.kernel = std::move(kernel);
    r.status = status;
    r.iterations = iterations;
    r.method = std::move(method);
    return r;
}

EngineResult infeasible(InfeasibleReason reason, std::string note, std::size_t iterations = 0) {
    EngineResult r;
    r.status = SolveStatus::Infeasible;
    r.reason = reason;
    r.note = std::move(note);
    r.iterations = iterations;
    r.objective = std::numeric_limits<double>::quiet_NaN();
    return r;
}

EngineResult solve_as_lp(const ProblemInstance& prob, std::span<const double> cost, double max_distortion,
                         PerceptionRows mode, double max_perception) {
    const lp::Solution s = lp::solve(kernel_lp(prob, cost, max_distortion, mode, max_perception));
    switch (s.status) {
        case lp::Status::Optimal: {
            std::vector<double> k(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(cost.size()));
            EngineResult r = finish(prob, cost, std::move(k), SolveStatus::Optimal, s.pivots, "simplex");
            r.note = "optimal basis";
            return r;
        }
        case lp::Status::Infeasible:
            return infeasible(mode == PerceptionRows::None ? InfeasibleReason::Distortion
                                                           : InfeasibleReason::Perception,
                              "simplex phase 1 found no feasible kernel", s.pivots);
        default: {
            EngineResult r = infeasible(InfeasibleReason::None, "simplex pivot limit", s.pivots);
            r.status = SolveStatus::IterationLimit;
            return r;
        }
    }
}

// Kernel with the largest support inside the distortion budget: the uniform
// kernel pulled toward the barycenter of the min-distortion face as far as
// the budget requires.
std::vector<double> interior_start(const ProblemInstance& prob, double max_distortion) {
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size();
    const auto w = prob.distortion_weights();
    std::vector<double> uniform(ny * nr, 1.0 / static_cast<double>(nr));
    if (!std::isfinite(max_distortion)) return uniform;

    std::vector<double> face(ny * nr, 0.0);
    for (std::size_t y = 0; y < ny; ++y) {
        const auto row = w.subspan(y * nr, nr);
        const double best = *std::min_element(row.begin(), row.end());
        std::size_t ties = 0;
        for (double v : row) ties += v <= best + kTieSlack ? 1 : 0;
        for (std::size_t j = 0; j < nr; ++j)
            face[y * nr + j] = row[j] <= best + kTieSlack ? 1.0 / static_cast<double>(ties) : 0.0;
    }
    const double d_face = dot(w, face), d_uniform = dot(w, uniform);
    double s = 1.0;
    if (d_uniform > max_distortion)
        s = std::clamp((max_distortion - d_face) / (d_uniform - d_face), 0.0, 1.0);
    std::vector<double> k(ny * nr);
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = (1.0 - s) * face[i] + s * uniform[i];
    return k;
}

// Linear minimization over {stochastic rows, E[Delta] <= D}.
std::vector<double> polytope_argmin(const ProblemInstance& prob, std::span<const double> grad, double max_distortion) {
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size();
    std::vector<double> k = row_argmin_kernel(grad, ny, nr);
    if (!std::isfinite(max_distortion) || dot(prob.distortion_weights(), k) <= max_distortion) return k;
    const lp::Solution s = lp::solve(kernel_lp(prob, grad, max_distortion, PerceptionRows::None, 0.0));
    if (s.status != lp::Status::Optimal) return {};
    k.assign(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(ny * nr));
    clean_rows(k, ny, nr);
    return k;
}

// Minimizes a convex function of t on [0,1] by golden-section search.
template <class F>
double golden_section(F&& f, double& best_value) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = f(x2);
        }
    }
    if (f1 <= f2) {
        best_value = f1;
        return x1;
    }
    best_value = f2;
    return x2;
}

std::vector<double> finite_gradient(const DivergenceKind& kind, std::span<const double> p,
                                    std::span<const double> q) {
    // Infinite entries only arise where every feasible kernel has q_j = 0, so
    // any coefficient there yields the same cut on the feasible set.
    std::vector<double> g = divergence_gradient(kind, p, q);
    for (double& v : g)
        if (!std::isfinite(v)) v = 0.0;
    return g;
}

constexpr double kTangentFloor = 1e-9;

// d(p, q) <= P rewritten as sum_j psi_j(q_j) <= budget with convex psi_j:
//   KL         psi_j = -p_j ln q_j                budget P - sum p_j ln p_j
//   Hellinger  psi_j = (sqrt p_j - sqrt q_j)^2 / 2  budget P
//   Renyi a<1  psi_j = -p_j^a q_j^(1-a)           budget -exp((a-1) P)
//   Renyi a>1  psi_j =  p_j^a q_j^(1-a)           budget  exp((a-1) P)
// The Renyi rows follow from the monotone map S -> ln(S)/(a-1).
class SeparableBall {
public:
    SeparableBall(const DivergenceKind& kind, std::span<const double> p, double P)
        : kind_(kind.kind()), p_(p.begin(), p.end()), alpha_(kind.alpha().value_or(1.0)) {
        switch (kind_) {
            case DivergenceKind::Kind::KullbackLeibler:
                budget_ = P;
                for (double v : p_)
                    if (v > 0.0) budget_ -= v * std::log(v);
                break;
            case DivergenceKind::Kind::Hellinger: budget_ = P; break;
            case DivergenceKind::Kind::RenyiAlpha:
                budget_ = alpha_ < 1.0 ? -std::exp((alpha_ - 1.0) * P) : std::exp((alpha_ - 1.0) * P);
                break;
            case DivergenceKind::Kind::TotalVariation: break;
        }
    }

    // Zero weight means psi_j vanishes identically.
    double weight(std::size_t j) const { return p_[j]; }

    double psi(std::size_t j, double q) const {
        const double p = p_[j];
        if (p == 0.0) return kind_ == DivergenceKind::Kind::Hellinger ? 0.5 * q : 0.0;
        switch (kind_) {
            case DivergenceKind::Kind::KullbackLeibler: return -p * std::log(q);
            case DivergenceKind::Kind::Hellinger: return 0.5 * (std::sqrt(p) - std::sqrt(q)) * (std::sqrt(p) - std::sqrt(q));
            default: {
                const double v = std::pow(p, alpha_) * std::pow(q, 1.0 - alpha_);
                return alpha_ < 1.0 ? -v : v;
            }
        }
    }
    double slope(std::size_t j, double q) const {
        const double p = p_[j];
        if (p == 0.0) return kind_ == DivergenceKind::Kind::Hellinger ? 0.5 : 0.0;
        switch (kind_) {
            case DivergenceKind::Kind::KullbackLeibler: return -p / q;
            case DivergenceKind::Kind::Hellinger: return 0.5 - 0.5 * std::sqrt(p / q);
            default: {
                const double v = (1.0 - alpha_) * std::pow(p, alpha_) * std::pow(q, -alpha_);
                return alpha_ < 1.0 ? -v : v;
            }
        }
    }
    // Every psi_j is convex and either decreasing or minimal at q = p_j.
    double floor(std::size_t j) const { return std::min(psi(j, 1.0), p_[j] > 0.0 ? psi(j, p_[j]) : psi(j, 0.0)); }

    // LP over the kernel and u_j = t_j - floor_j >= 0 with sum_j t_j <= budget.
    lp::Problem outer_lp(const ProblemInstance& prob, std::span<const double> cost, double max_distortion,
                         const std::vector<std::vector<double>>& tangents) const {
        const std::size_t ny = prob.observed_size(), nr = prob.restore_size(), nk = ny * nr;
        const auto p_y = prob.observed_marginal().mass();
        lp::Problem lp = kernel_lp(prob, cost, max_distortion, PerceptionRows::None, 0.0);
        for (auto& row : lp.rows) row.coeffs.resize(nk + nr, 0.0);
        lp.objective.resize(nk + nr, 0.0);

        double total_floor = 0.0;
        for (std::size_t j = 0; j < nr; ++j) total_floor += floor(j);
        std::vector<double> sum(nk + nr, 0.0);
        for (std::size_t j = 0; j < nr; ++j) sum[nk + j] = 1.0;
        lp.add(std::move(sum), lp::Sense::LessEqual, budget_ - total_floor);

        for (std::size_t j = 0; j < nr; ++j)
            for (double a : tangents[j]) {
                // slope * q_j - u_j <= slope * a - psi(a) + floor_j, scaled to unit slope.
                const double g = slope(j, a);
                const double scale = std::max(1.0, std::abs(g));
                std::vector<double> row(nk + nr, 0.0);
                for (std::size_t y = 0; y < ny; ++y) row[y * nr + j] = g * p_y[y] / scale;
                row[nk + j] = -1.0 / scale;
                lp.add(std::move(row), lp::Sense::LessEqual, (g * a - psi(j, a) + floor(j)) / scale);
            }
        return lp;
    }

private:
    DivergenceKind::Kind kind_;
    std::vector<double> p_;
    double alpha_;
    double budget_ = 0.0;
};

// Smooth convex perception constraint (KL, Hellinger, Renyi) with 0 < P < inf.
//
// Phase 1 runs Frank-Wolfe on d(p_X, p_Xhat) over the distortion polytope to
// find an interior point or certify that the ball misses the polytope.
// Phase 2 splits the divergence into per-coordinate convex terms and bounds
// each from below with tangent lines. The LP over those tangents gives a lower
// bound. The boundary point between the interior point and the LP solution is
// feasible, so it gives the upper bound and the next tangents.
EngineResult minimize_smooth(const ProblemInstance& prob, std::span<const double> cost, double max_distortion,
                             double max_perception, const SolverOptions& options) {
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size(), nk = ny * nr;
    const DivergenceKind& kind = prob.divergence();
    const auto p_x = prob.source_marginal().mass();
    const auto p_y = prob.observed_marginal().mass();
    const double P = max_perception;
    auto g_of = [&](std::span<const double> q) { return divergence(kind, p_x, q); };

    std::vector<double> k = interior_start(prob, max_distortion);
    std::vector<double> q = restored_marginal(prob, k);
    double gval = g_of(q);
    if (std::isinf(gval))
        return infeasible(InfeasibleReason::Support, "divergence is infinite for every kernel within the distortion budget");

    std::size_t iterations = 0, polish = 0;
    for (; iterations < options.max_iterations; ++iterations) {
        const bool inside = gval < P;
        if (inside && ++polish > kInteriorPolish) break;
        const std::vector<double> gq = finite_gradient(kind, p_x, q);
        std::vector<double> grad(nk);
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t j = 0; j < nr; ++j) grad[y * nr + j] = gq[j] * p_y[y];
        const std::vector<double> s = polytope_argmin(prob, grad, max_distortion);
        if (s.empty()) break;
        const std::vector<double> qs = restored_marginal(prob, s);
        double fw_gap = 0.0;
        for (std::size_t j = 0; j < nr; ++j) fw_gap += gq[j] * (q[j] - qs[j]);
        if (!inside && gval - fw_gap > P + 1e-12)
            return infeasible(InfeasibleReason::Perception,
                              "Frank-Wolfe lower bound on the divergence exceeds the perception budget", iterations);
        if (inside && fw_gap <= 0.5 * (P - gval)) break;

        std::vector<double> qt(nr);
        auto along = [&](double t) {
            for (std::size_t j = 0; j < nr; ++j) qt[j] = (1.0 - t) * q[j] + t * qs[j];
            return g_of(qt);
        };
        double next = 0.0;
        const double step = golden_section(along, next);
        if (!(next < gval)) {
            if (inside || gval <= P) break;
            return infeasible(InfeasibleReason::Perception, "Frank-Wolfe stalled above the perception budget",
                              iterations);
        }
        for (std::size_t i = 0; i < nk; ++i) k[i] = (1.0 - step) * k[i] + step * s[i];
        for (std::size_t j = 0; j < nr; ++j) q[j] = (1.0 - step) * q[j] + step * qs[j];
        gval = next;
    }
    if (gval > P) {
        EngineResult r = infeasible(InfeasibleReason::Perception, "no kernel inside the perception budget found",
                                    iterations);
        r.status = SolveStatus::IterationLimit;
        return r;
    }

    const SeparableBall ball(kind, p_x, P);
    const std::vector<double> interior = k, q_in = q;
    std::vector<double> best = k;
    double upper = dot(cost, k), lower = -kInf;

    // Tangent lines t_j >= psi_j(a) + psi_j'(a) (q_j - a) per coordinate.
    std::vector<std::vector<double>> tangents(nr);
    auto add_tangent = [&](std::size_t j, double a) {
        a = std::clamp(a, kTangentFloor, 1.0);
        for (double b : tangents[j])
            if (std::abs(b - a) <= 1e-12 * std::max(1.0, a)) return false;
        tangents[j].push_back(a);
        return true;
    };
    for (std::size_t j = 0; j < nr; ++j) {
        add_tangent(j, 1.0);
        add_tangent(j, q_in[j]);
        if (p_x[j] > 0.0)
            for (double m : kInitialTangents) add_tangent(j, m * p_x[j]);
    }

    SolveStatus status = SolveStatus::IterationLimit;
    std::size_t rounds = 0;
    for (; iterations < options.max_iterations; ++iterations, ++rounds) {
        const lp::Solution s = lp::solve(ball.outer_lp(prob, cost, max_distortion, tangents));
        if (s.status != lp::Status::Optimal) break;
        lower = std::max(lower, s.objective);
        std::vector<double> klp(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(nk));
        clean_rows(klp, ny, nr);
        const std::vector<double> qlp = restored_marginal(prob, klp);
        if (g_of(qlp) <= P) {
            if (dot(cost, klp) < upper) {
                upper = dot(cost, klp);
                best = klp;
            }
            status = SolveStatus::Optimal;
            break;
        }
        std::vector<double> qt(nr);
        auto at = [&](double t) {
            for (std::size_t j = 0; j < nr; ++j) qt[j] = (1.0 - t) * q_in[j] + t * qlp[j];
            return g_of(qt);
        };
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (at(mid) <= P ? lo : hi) = mid;
        }
        std::vector<double> kb(nk);
        for (std::size_t i = 0; i < nk; ++i) kb[i] = (1.0 - lo) * interior[i] + lo * klp[i];
        if (dot(cost, kb) < upper) {
            upper = dot(cost, kb);
            best = kb;
        }
        if (upper - lower <= options.convex_gap) {
            status = SolveStatus::Optimal;
            break;
        }
        at(lo);
        bool added = false;
        for (std::size_t j = 0; j < nr; ++j) {
            if (ball.weight(j) == 0.0) continue;
            added = add_tangent(j, qlp[j]) || added;
            added = add_tangent(j, qt[j]) || added;
        }
        if (!added) break;
    }

    EngineResult r = finish(prob, cost, std::move(best), status, iterations, "frank-wolfe+tangent-outer-approximation");
    r.gap = std::max(0.0, upper - lower);
    r.note = std::to_string(rounds) + " outer rounds";
    if (status == SolveStatus::IterationLimit) r.note += "; stopped early, best feasible iterate returned";
    return r;
}

}  // namespace

std::vector<double> restored_marginal(const ProblemInstance& prob, std::span<const double> kernel) {
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size();
    const auto p_y = prob.observed_marginal().mass();
    std::vector<double> q(nr, 0.0);
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t j = 0; j < nr; ++j) q[j] += p_y[y] * kernel[y * nr + j];
    return q;
}

std::vector<double> row_argmin_kernel(std::span<const double> cost, std::size_t rows, std::size_t cols) {
    std::vector<double> k(rows * cols, 0.0);
    for (std::size_t y = 0; y < rows; ++y) {
        const auto row = cost.subspan(y * cols, cols);
        k[y * cols + static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin())] = 1.0;
    }
    return k;
}

Channel to_channel(const ProblemInstance& prob, std::vector<double> kernel) {
    return Channel(Alphabet(prob.observed_size()), prob.restore_alphabet(), std::move(kernel));
}

double relaxed_lower_bound(const ProblemInstance& prob, std::span<const double> cost, double max_distortion,
                           double max_perception) {
    if (std::isfinite(max_distortion) && max_distortion < min_distortion(prob) - kDistortionSlack) return kInf;
    PerceptionRows mode = PerceptionRows::TotalVariation;
    double radius = 0.0;
    if (!std::isfinite(max_perception)) {
        const std::vector<double> k = row_argmin_kernel(cost, prob.observed_size(), prob.restore_size());
        if (!std::isfinite(max_distortion) || dot(prob.distortion_weights(), k) <= max_distortion) return dot(cost, k);
        mode = PerceptionRows::None;
    } else if (max_perception == 0.0) {
        mode = PerceptionRows::Pinned;
    } else {
        radius = total_variation_radius(prob.divergence(), max_perception);
    }
    const lp::Solution s = lp::solve(kernel_lp(prob, cost, max_distortion, mode, radius));
    if (s.status == lp::Status::Infeasible) return kInf;
    return s.status == lp::Status::Optimal ? s.objective : -kInf;
}

EngineResult minimize_linear(const ProblemInstance& prob, std::span<const double> cost, double max_distortion,
                             double max_perception, const SolverOptions& options) {
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size();
    if (std::isfinite(max_distortion) && max_distortion < min_distortion(prob) - kDistortionSlack)
        return infeasible(InfeasibleReason::Distortion, "budget below the minimum achievable distortion");

    if (!std::isfinite(max_perception)) {
        std::vector<double> k = row_argmin_kernel(cost, ny, nr);
        if (!std::isfinite(max_distortion) || dot(prob.distortion_weights(), k) <= max_distortion)
            return finish(prob, cost, std::move(k), SolveStatus::Optimal, 0, "closed-form");
        return solve_as_lp(prob, cost, max_distortion, PerceptionRows::None, 0.0);
    }
    if (max_perception == 0.0) return solve_as_lp(prob, cost, max_distortion, PerceptionRows::Pinned, 0.0);
    if (prob.divergence().kind() == DivergenceKind::Kind::TotalVariation)
        return solve_as_lp(prob, cost, max_distortion, PerceptionRows::TotalVariation, max_perception);
    return minimize_smooth(prob, cost, max_distortion, max_perception, options);
}

}  // namespace cdp::detail
