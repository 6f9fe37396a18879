#include "cdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cdp/classify.hpp"
#include "cdp/metrics.hpp"

namespace cdp::oracle {

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();
constexpr double kBudgetSlack = 1e-12;

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > kSaturated / a) return kSaturated;
    return a * b;
}

std::size_t saturating_pow(std::size_t base, std::size_t exp) {
    std::size_t v = 1;
    for (std::size_t i = 0; i < exp; ++i) v = saturating_mul(v, base);
    return v;
}

// Integer compositions of `total` into `parts` nonnegative parts.
void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t>& current,
                  std::vector<std::vector<std::size_t>>& out) {
    if (current.size() + 1 == parts) {
        current.push_back(total);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (std::size_t v = 0; v <= total; ++v) {
        current.push_back(v);
        compositions(total - v, parts, current, out);
        current.pop_back();
    }
}

std::vector<std::vector<std::size_t>> row_lattice(std::size_t divisions, std::size_t parts) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> current;
    compositions(divisions, parts, current, out);
    return out;
}

enum class Objective { FixedClassifier, Bayes };

OracleResult search(const ProblemInstance& prob, double max_distortion, double max_perception, const KernelGrid& grid,
                    Objective objective) {
    if (std::isnan(max_distortion) || max_distortion < 0.0 || std::isnan(max_perception) || max_perception < 0.0)
        throw std::invalid_argument("oracle: budgets must be nonnegative");
    // Pipeline quantities recomputed here rather than taken from the
    // instance's cached linear forms.
    const MixtureSource observed = push_forward(prob.source(), prob.degrade());
    const ProbVector p_x = prob.source().marginal();
    const std::size_t ny = observed.alphabet().size(), nr = prob.restore_size();
    if (grid.input().size() != ny || grid.output().size() != nr)
        throw DimensionError("oracle: grid shape must be |Y| x |Xhat|");
    if (std::isfinite(max_perception) && !prob.perception_defined())
        throw DimensionError("oracle: perception budget needs |Xhat| == |X|");
    if (grid.cardinality() > kMaxLatticeKernels)
        throw SizeError("oracle: lattice has more than " + std::to_string(kMaxLatticeKernels) + " kernels");

    OracleResult res;
    const double step = grid.step();
    res.rounding_radius = std::min(2.0, static_cast<double>(nr) * step);

    // Per-unit-l1 sensitivities of each row of the kernel.
    const DistortionMatrix& delta = prob.delta();
    for (std::size_t y = 0; y < ny; ++y) {
        double wmin = std::numeric_limits<double>::infinity(), wmax = -wmin;
        for (std::size_t j = 0; j < nr; ++j) {
            double w = 0.0;
            for (std::size_t x = 0; x < p_x.size(); ++x) w += p_x[x] * prob.degrade()(x, y) * delta(x, j);
            wmin = std::min(wmin, w);
            wmax = std::max(wmax, w);
        }
        res.distortion_relax += 0.5 * (wmax - wmin);
        const double a = observed.prior1() * observed.class1()[y], b = observed.prior2() * observed.class2()[y];
        if (objective == Objective::FixedClassifier)
            res.lipschitz_objective += prob.classifier().is_proper() ? 0.5 * std::abs(a - b) : 0.0;
        else
            res.lipschitz_objective += std::max(a, b);
    }
    res.distortion_relax *= res.rounding_radius;
    switch (prob.divergence().kind()) {
        case DivergenceKind::Kind::TotalVariation: res.perception_relax = 0.5 * res.rounding_radius; break;
        case DivergenceKind::Kind::Hellinger: res.perception_relax = std::sqrt(res.rounding_radius); break;
        default: res.perception_relax = std::numeric_limits<double>::infinity(); break;
    }

    const auto rows = row_lattice(grid.divisions(), nr);
    const double n = static_cast<double>(grid.divisions());
    std::vector<std::size_t> pick(ny, 0);
    std::vector<double> entries(ny * nr);
    double relaxed = std::numeric_limits<double>::infinity();
    res.value = std::numeric_limits<double>::infinity();
    while (true) {
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t j = 0; j < nr; ++j) entries[y * nr + j] = static_cast<double>(rows[pick[y]][j]) / n;
        Channel kernel(observed.alphabet(), prob.restore_alphabet(), entries);
        const MixtureSource restored = push_forward(observed, kernel);
        const double dist = expected_distortion(prob.source(), prob.degrade(), kernel, delta);
        const double perc = std::isfinite(max_perception)
                                ? divergence(prob.divergence(), p_x, restored.marginal())
                                : 0.0;
        ++res.evaluated;
        const bool relaxed_ok = dist <= max_distortion + res.distortion_relax + kBudgetSlack &&
                                perc <= max_perception + res.perception_relax + kBudgetSlack;
        if (relaxed_ok) {
            const double v = objective == Objective::FixedClassifier ? error_rate(restored, prob.classifier())
                                                                     : bayes_error(restored);
            relaxed = std::min(relaxed, v);
            if (dist <= max_distortion + kBudgetSlack && perc <= max_perception + kBudgetSlack && v < res.value) {
                res.value = v;
                res.kernel = std::move(kernel);
                res.feasible = true;
            }
        }
        std::size_t y = 0;
        while (y < ny && ++pick[y] == rows.size()) pick[y++] = 0;
        if (y == ny) break;
    }
    if (std::isfinite(relaxed)) res.relaxed_value = relaxed;
    if (res.feasible)
        res.slack = res.lipschitz_objective * res.rounding_radius + std::max(0.0, res.value - relaxed);
    else
        res.value = std::numeric_limits<double>::quiet_NaN();
    return res;
}

}  // namespace

KernelGrid::KernelGrid(Alphabet input, Alphabet output, double step) : input_(input), output_(output), divisions_(0) {
    if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("KernelGrid: step must lie in (0,1]");
    const double n = std::round(1.0 / step);
    if (std::abs(n * step - 1.0) > 1e-12) throw std::invalid_argument("KernelGrid: step must divide 1");
    divisions_ = static_cast<std::size_t>(n);
}

std::size_t KernelGrid::cardinality() const noexcept {
    // Row count C(N + k - 1, k - 1), computed incrementally; exact while it fits.
    const std::size_t k = output_.size();
    std::size_t row = 1;
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t num = divisions_ + i;
        if (row > kSaturated / num) return kSaturated;
        row = row * num / i;
    }
    return saturating_pow(row, input_.size());
}

std::vector<Channel> enumerate_deterministic_kernels(Alphabet input, Alphabet output) {
    const std::size_t count = saturating_pow(output.size(), input.size());
    if (count > kMaxDeterministicKernels)
        throw SizeError("enumerate_deterministic_kernels: " + std::to_string(output.size()) + "^" +
                        std::to_string(input.size()) + " kernels exceeds the bound");
    std::vector<Channel> out;
    out.reserve(count);
    std::vector<std::size_t> target(input.size(), 0);
    while (true) {
        out.push_back(Channel::deterministic(output.size(), target));
        std::size_t i = 0;
        while (i < target.size() && ++target[i] == output.size()) target[i++] = 0;
        if (i == target.size()) break;
    }
    return out;
}

OracleResult grid_search_cdp(const ProblemInstance& prob, double max_distortion, double max_perception,
                             const KernelGrid& grid) {
    return search(prob, max_distortion, max_perception, grid, Objective::FixedClassifier);
}

OracleResult grid_search_scdp(const ProblemInstance& prob, double max_distortion, double max_perception,
                              const KernelGrid& grid) {
    return search(prob, max_distortion, max_perception, grid, Objective::Bayes);
}

}  // namespace cdp::oracle
