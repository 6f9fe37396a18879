#include "cdp/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "cdp/sampling.hpp"
#include "kernel_program.hpp"

namespace cdp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFeasibilitySlack = 1e-12;
constexpr std::size_t kMaxDescentRounds = 100;

void check_budgets(const ProblemInstance& prob, double max_distortion, double max_perception) {
    if (std::isnan(max_distortion) || max_distortion < 0.0)
        throw std::invalid_argument("distortion budget must be nonnegative");
    if (std::isnan(max_perception) || max_perception < 0.0)
        throw std::invalid_argument("perception budget must be nonnegative");
    if (std::isfinite(max_perception) && !prob.perception_defined())
        throw DimensionError("perception budget needs the restoration alphabet to match the source alphabet");
}

TradeoffResult infeasible_result(const detail::EngineResult& e) {
    TradeoffResult r;
    r.value = kNaN;
    r.achieved_distortion = kNaN;
    r.achieved_perception = kNaN;
    r.status = e.status;
    r.reason = e.reason;
    r.certificate.iterations = e.iterations;
    r.certificate.method = e.method;
    r.certificate.note = e.note;
    return r;
}

// Replays a kernel through the pipeline to fill value and achieved budgets.
template <class Objective>
TradeoffResult replay(const ProblemInstance& prob, std::vector<double> kernel, SolveStatus status,
                      Objective&& objective) {
    TradeoffResult r;
    Channel k = detail::to_channel(prob, std::move(kernel));
    r.value = objective(k);
    r.achieved_distortion = prob.distortion(k);
    r.achieved_perception = prob.perception_defined() ? prob.perception(k) : kNaN;
    r.kernel = std::move(k);
    r.status = status;
    return r;
}

// Bayes error of the restored mixture straight from a row-major kernel.
double kernel_bayes_error(const ProblemInstance& prob, std::span<const double> kernel) {
    const MixtureSource& y = prob.observed();
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size();
    double total = 0.0;
    for (std::size_t j = 0; j < nr; ++j) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < ny; ++i) {
            a += y.class1()[i] * kernel[i * nr + j];
            b += y.class2()[i] * kernel[i * nr + j];
        }
        total += std::min(y.prior1() * a, y.prior2() * b);
    }
    return total;
}

unsigned long long region_mask(const DecisionRegion& region) {
    unsigned long long mask = 0;
    for (std::size_t j = 0; j < region.size(); ++j)
        if (region.contains(j)) mask |= 1ULL << j;
    return mask;
}

unsigned long long bayes_mask(const ProblemInstance& prob, std::span<const double> kernel) {
    const MixtureSource& y = prob.observed();
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size();
    unsigned long long mask = 0;
    for (std::size_t j = 0; j < nr; ++j) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < ny; ++i) {
            a += y.class1()[i] * kernel[i * nr + j];
            b += y.class2()[i] * kernel[i * nr + j];
        }
        if (y.prior1() * a >= y.prior2() * b) mask |= 1ULL << j;
    }
    return mask;
}

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    std::vector<double> kernel;
    std::string branch;

    void offer(double v, std::span<const double> k, const char* from) {
        if (v < value) {
            value = v;
            kernel.assign(k.begin(), k.end());
            branch = from;
        }
    }
};

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap) {
    std::size_t v = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (v > cap / base) return cap + 1;
        v *= base;
    }
    return v;
}

}  // namespace

ProblemInstance::ProblemInstance(MixtureSource source, Channel degrade, Alphabet restore_alphabet,
                                 DistortionMatrix delta, DivergenceKind divergence, DecisionRegion classifier)
    : source_(std::move(source)),
      degrade_(std::move(degrade)),
      restore_(restore_alphabet),
      delta_(std::move(delta)),
      divergence_(divergence),
      classifier_(std::move(classifier)),
      observed_(push_forward(source_, degrade_)),
      source_marginal_(source_.marginal()),
      observed_marginal_(observed_.marginal()) {
    if (delta_.from() != source_.alphabet())
        throw DimensionError("ProblemInstance: distortion rows must index the source alphabet");
    if (delta_.to() != restore_)
        throw DimensionError("ProblemInstance: distortion columns must index the restoration alphabet");
    if (classifier_.alphabet() != restore_)
        throw DimensionError("ProblemInstance: classifier must be a region over the restoration alphabet");

    const std::size_t nx = source_.alphabet().size(), ny = observed_size(), nr = restore_size();
    distortion_weights_.assign(ny * nr, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            const double wxy = source_marginal_[x] * degrade_(x, y);
            if (wxy == 0.0) continue;
            for (std::size_t j = 0; j < nr; ++j) distortion_weights_[y * nr + j] += wxy * delta_(x, j);
        }
    classifier_costs_ = region_costs(classifier_);
}

std::vector<double> ProblemInstance::region_costs(const DecisionRegion& region) const {
    if (region.alphabet() != restore_) throw DimensionError("region_costs: region is not over the restoration alphabet");
    const std::size_t ny = observed_size(), nr = restore_size();
    std::vector<double> c(ny * nr);
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t j = 0; j < nr; ++j)
            c[y * nr + j] = region.contains(j) ? observed_.prior2() * observed_.class2()[y]
                                               : observed_.prior1() * observed_.class1()[y];
    return c;
}

void ProblemInstance::check_kernel(const Channel& kernel) const {
    if (kernel.input() != observed_.alphabet() || kernel.output() != restore_)
        throw DimensionError("restoration kernel must map the observed alphabet to the restoration alphabet");
}

MixtureSource ProblemInstance::restored(const Channel& kernel) const {
    check_kernel(kernel);
    return push_forward(observed_, kernel);
}

double ProblemInstance::distortion(const Channel& kernel) const {
    check_kernel(kernel);
    return expected_distortion(source_, degrade_, kernel, delta_);
}

double ProblemInstance::perception(const Channel& kernel) const {
    if (!perception_defined()) throw DimensionError("perception needs |Xhat| == |X|");
    return cdp::divergence(divergence_, source_marginal_, restored(kernel).marginal());
}

double ProblemInstance::classifier_error(const Channel& kernel) const {
    return error_rate(restored(kernel), classifier_);
}

double ProblemInstance::restored_bayes_error(const Channel& kernel) const { return bayes_error(restored(kernel)); }

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::IterationLimit: return "IterationLimit";
    }
    return "Unknown";
}

std::string to_string(InfeasibleReason reason) {
    switch (reason) {
        case InfeasibleReason::None: return "none";
        case InfeasibleReason::Distortion: return "distortion";
        case InfeasibleReason::Perception: return "perception";
        case InfeasibleReason::Support: return "support";
    }
    return "unknown";
}

std::string to_string(Surface which) { return which == Surface::CDP ? "cdp" : "scdp"; }

double min_distortion(const ProblemInstance& prob) {
    const auto w = prob.distortion_weights();
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size();
    double total = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
        const auto row = w.subspan(y * nr, nr);
        total += *std::min_element(row.begin(), row.end());
    }
    return total;
}

TradeoffResult solve_cdp(const ProblemInstance& prob, double max_distortion, double max_perception,
                         const SolverOptions& options) {
    check_budgets(prob, max_distortion, max_perception);
    detail::EngineResult e =
        detail::minimize_linear(prob, prob.classifier_costs(), max_distortion, max_perception, options);
    if (e.kernel.empty()) return infeasible_result(e);
    TradeoffResult r = replay(prob, std::move(e.kernel), e.status,
                              [&](const Channel& k) { return prob.classifier_error(k); });
    r.certificate = {e.iterations, e.gap, e.method, false, e.note};
    return r;
}

TradeoffResult solve_scdp(const ProblemInstance& prob, double max_distortion, double max_perception,
                          const SolverOptions& options) {
    check_budgets(prob, max_distortion, max_perception);
    const std::size_t ny = prob.observed_size(), nr = prob.restore_size();

    // One engine solve per classifier region, shared by the enumeration and
    // the descent branches.
    std::map<unsigned long long, detail::EngineResult> by_region;
    std::size_t iterations = 0;
    bool hit_limit = false;
    auto solve_region = [&](unsigned long long mask) -> const detail::EngineResult& {
        auto it = by_region.find(mask);
        if (it != by_region.end()) return it->second;
        const auto cost = prob.region_costs(DecisionRegion::from_mask(nr, mask));
        detail::EngineResult e = detail::minimize_linear(prob, cost, max_distortion, max_perception, options);
        iterations += e.iterations;
        hit_limit = hit_limit || e.status == SolveStatus::IterationLimit;
        return by_region.emplace(mask, std::move(e)).first->second;
    };

    // Relaxation bounds let whole regions be skipped: C_S = min_R C_R and
    // C_R >= bound(R), so a region whose bound reaches the incumbent cannot help.
    std::map<unsigned long long, double> bounds;
    auto bound_of = [&](unsigned long long mask) {
        auto it = bounds.find(mask);
        if (it != bounds.end()) return it->second;
        const auto cost = prob.region_costs(DecisionRegion::from_mask(nr, mask));
        return bounds.emplace(mask, detail::relaxed_lower_bound(prob, cost, max_distortion, max_perception))
            .first->second;
    };
    constexpr double kPruneSlack = 1e-12;

    Candidate best;
    // Deterministic kernels (vertices of the kernel polytope) give a cheap incumbent.
    if (checked_power(nr, ny, options.max_deterministic_kernels) <= options.max_deterministic_kernels) {
        std::vector<std::size_t> target(ny, 0);
        std::vector<double> k(ny * nr);
        while (true) {
            std::fill(k.begin(), k.end(), 0.0);
            for (std::size_t y = 0; y < ny; ++y) k[y * nr + target[y]] = 1.0;
            double dist = 0.0;
            for (std::size_t i = 0; i < k.size(); ++i) dist += prob.distortion_weights()[i] * k[i];
            bool feasible = !std::isfinite(max_distortion) || dist <= max_distortion + kFeasibilitySlack;
            if (feasible && std::isfinite(max_perception)) {
                const auto q = detail::restored_marginal(prob, k);
                feasible = divergence(prob.divergence(), prob.source_marginal().mass(), q) <=
                           max_perception + kFeasibilitySlack;
            }
            if (feasible) best.offer(kernel_bayes_error(prob, k), k, "deterministic-vertex");
            std::size_t y = 0;
            while (y < ny && ++target[y] == nr) target[y++] = 0;
            if (y == ny) break;
        }
    }

    // The fixed classifier's own optimum: its restored Bayes error is at most
    // C(D,P), so the strong value never exceeds the weak one. The feasible set
    // does not depend on the region, so this solve also settles feasibility.
    {
        const bool small = nr <= 63;
        const unsigned long long mask = small ? region_mask(prob.classifier()) : 0;
        detail::EngineResult direct;
        if (!small) direct = detail::minimize_linear(prob, prob.classifier_costs(), max_distortion, max_perception, options);
        const detail::EngineResult& e = small ? solve_region(mask) : direct;
        if (e.kernel.empty() && best.kernel.empty()) return infeasible_result(e);
        if (!e.kernel.empty()) best.offer(kernel_bayes_error(prob, e.kernel), e.kernel, "fixed-classifier-seed");
    }

    bool exact = false;
    double lower = std::numeric_limits<double>::infinity();
    if (nr <= options.max_region_enumeration) {
        std::vector<std::pair<double, unsigned long long>> order;
        for (unsigned long long mask = 0; mask < (1ULL << nr); ++mask) order.emplace_back(bound_of(mask), mask);
        std::sort(order.begin(), order.end());
        bool all_optimal = true;
        for (const auto& [b, mask] : order) {
            if (b >= best.value - kPruneSlack) {
                // Sorted, so every remaining region is pruned as well.
                lower = std::min(lower, b);
                break;
            }
            const detail::EngineResult& e = solve_region(mask);
            if (e.kernel.empty()) {
                all_optimal = false;
                lower = std::min(lower, b);
                continue;
            }
            all_optimal = all_optimal && e.status == SolveStatus::Optimal;
            lower = std::min(lower, e.objective - e.gap);
            best.offer(kernel_bayes_error(prob, e.kernel), e.kernel, "region-enumeration");
        }
        exact = all_optimal;
    }

    // Multi-start descent alternating the Bayes region of the restored signal
    // and the best kernel for that region; never increases the Bayes error.
    if (!exact && nr <= 63) {
        sampling::Rng rng(options.seed);
        for (std::size_t start = 0; start < options.multistart; ++start) {
            unsigned long long mask = bayes_mask(prob, sampling::channel(rng, ny, nr).entries());
            double current = std::numeric_limits<double>::infinity();
            for (std::size_t round = 0; round < kMaxDescentRounds; ++round) {
                if (!by_region.contains(mask) && bound_of(mask) >= best.value - kPruneSlack) break;
                const detail::EngineResult& e = solve_region(mask);
                if (e.kernel.empty()) break;
                const double v = kernel_bayes_error(prob, e.kernel);
                best.offer(v, e.kernel, "multistart-descent");
                const unsigned long long next = bayes_mask(prob, e.kernel);
                if (!(v < current - 1e-9) || next == mask) break;
                current = v;
                mask = next;
            }
        }
    }

    if (best.kernel.empty()) {
        TradeoffResult r;
        r.value = r.achieved_distortion = r.achieved_perception = kNaN;
        r.status = SolveStatus::IterationLimit;
        r.certificate.note = "no feasible kernel found by any branch";
        return r;
    }
    TradeoffResult r = replay(prob, std::move(best.kernel),
                              exact || !hit_limit ? SolveStatus::Optimal : SolveStatus::IterationLimit,
                              [&](const Channel& k) { return prob.restored_bayes_error(k); });
    r.certificate.iterations = iterations;
    r.certificate.method = best.branch;
    r.certificate.exact = exact;
    r.certificate.gap = exact ? std::max(0.0, r.value - lower) : std::numeric_limits<double>::infinity();
    r.certificate.note = exact ? "global minimum over all classifier regions"
                               : "upper bound; classifier regions not enumerated";
    return r;
}

SurfaceTable sweep_surface(const ProblemInstance& prob, std::span<const double> d_grid,
                           std::span<const double> p_grid, Surface which, const SolverOptions& options,
                           unsigned threads) {
    if (d_grid.empty() || p_grid.empty()) throw std::invalid_argument("sweep_surface: empty grid");
    for (auto grid : {d_grid, p_grid}) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (std::isnan(grid[i]) || grid[i] < 0.0)
                throw std::invalid_argument("sweep_surface: grid values must be nonnegative");
            if (i > 0 && grid[i] < grid[i - 1]) throw std::invalid_argument("sweep_surface: grid must be ascending");
        }
    }
    SurfaceTable table;
    table.d_grid.assign(d_grid.begin(), d_grid.end());
    table.p_grid.assign(p_grid.begin(), p_grid.end());
    table.which = which;
    table.cells.resize(d_grid.size() * p_grid.size());

    auto solve_cell = [&](std::size_t idx) {
        const double D = table.d_grid[idx / p_grid.size()], P = table.p_grid[idx % p_grid.size()];
        table.cells[idx] = which == Surface::CDP ? solve_cdp(prob, D, P, options) : solve_scdp(prob, D, P, options);
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, table.cells.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < table.cells.size(); ++i) solve_cell(i);
        return table;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < table.cells.size(); i = next++) {
                    try {
                        solve_cell(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
    return table;
}

}  // namespace cdp
