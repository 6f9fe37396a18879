#include "cdp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> flatten_cost(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("DistortionMatrix: no rows");
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw DimensionError("DistortionMatrix: ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return flat;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

double kullback_leibler(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return kInf;
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

double hellinger_squared(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        s += d * d;
    }
    return 0.5 * s;
}

// sum_j p_j^alpha q_j^(1-alpha), +inf if alpha > 1 and q misses p's support.
double renyi_sum(double alpha, std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) {
            if (alpha > 1.0) return kInf;
            continue;
        }
        s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
    }
    return s;
}

double renyi(double alpha, std::span<const double> p, std::span<const double> q) {
    const double s = renyi_sum(alpha, p, q);
    if (std::isinf(s) || s == 0.0) return kInf;
    return std::log(s) / (alpha - 1.0);
}

}  // namespace

DivergenceKind DivergenceKind::renyi(double alpha) {
    if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))
        throw std::invalid_argument("Renyi order must be positive, finite and != 1");
    return DivergenceKind(Kind::RenyiAlpha, alpha);
}

std::string DivergenceKind::name() const {
    switch (kind_) {
        case Kind::TotalVariation: return "tv";
        case Kind::KullbackLeibler: return "kl";
        case Kind::Hellinger: return "hellinger";
        case Kind::RenyiAlpha: return "renyi";
    }
    return "unknown";
}

DistortionMatrix::DistortionMatrix(Alphabet from, Alphabet to, std::vector<double> row_major)
    : from_(from.size()), to_(to.size()), cost_(std::move(row_major)) {
    if (cost_.size() != from_ * to_) throw DimensionError("DistortionMatrix: entry count does not match shape");
    for (double c : cost_)
        if (!std::isfinite(c) || c < 0.0)
            throw std::invalid_argument("DistortionMatrix: costs must be finite and nonnegative");
}

DistortionMatrix::DistortionMatrix(const std::vector<std::vector<double>>& rows)
    : DistortionMatrix(Alphabet(rows.size()), Alphabet(rows.empty() ? 0 : rows.front().size()),
                       flatten_cost(rows)) {}

DistortionMatrix DistortionMatrix::hamming(std::size_t size) {
    std::vector<double> c(size * size, 1.0);
    for (std::size_t i = 0; i < size; ++i) c[i * size + i] = 0.0;
    return DistortionMatrix(Alphabet(size), Alphabet(size), std::move(c));
}

DistortionMatrix DistortionMatrix::squared_error(std::size_t size) {
    std::vector<double> c(size * size);
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            c[i * size + j] = d * d;
        }
    return DistortionMatrix(Alphabet(size), Alphabet(size), std::move(c));
}

double divergence(const DivergenceKind& kind, std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw DimensionError("divergence: alphabet mismatch");
    double v = 0.0;
    switch (kind.kind()) {
        case DivergenceKind::Kind::TotalVariation: v = total_variation(p, q); break;
        case DivergenceKind::Kind::KullbackLeibler: v = kullback_leibler(p, q); break;
        case DivergenceKind::Kind::Hellinger: v = hellinger_squared(p, q); break;
        case DivergenceKind::Kind::RenyiAlpha: v = renyi(*kind.alpha(), p, q); break;
    }
    // Rounding can push an exact zero slightly negative.
    return v < 0.0 ? 0.0 : v;
}

double divergence(const DivergenceKind& kind, const ProbVector& p, const ProbVector& q) {
    return divergence(kind, p.mass(), q.mass());
}

std::vector<double> divergence_gradient(const DivergenceKind& kind, std::span<const double> p,
                                        std::span<const double> q) {
    if (p.size() != q.size()) throw DimensionError("divergence_gradient: alphabet mismatch");
    std::vector<double> g(p.size(), 0.0);
    switch (kind.kind()) {
        case DivergenceKind::Kind::TotalVariation:
            throw std::invalid_argument("divergence_gradient: total variation is not differentiable");
        case DivergenceKind::Kind::KullbackLeibler:
            for (std::size_t j = 0; j < p.size(); ++j)
                if (p[j] > 0.0) g[j] = q[j] > 0.0 ? -p[j] / q[j] : -kInf;
            break;
        case DivergenceKind::Kind::Hellinger:
            // d/dq of 1/2 (p + q) - sqrt(p q)
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (p[j] == 0.0)
                    g[j] = 0.5;
                else
                    g[j] = q[j] > 0.0 ? 0.5 - 0.5 * std::sqrt(p[j] / q[j]) : -kInf;
            }
            break;
        case DivergenceKind::Kind::RenyiAlpha: {
            const double alpha = *kind.alpha();
            const double s = renyi_sum(alpha, p, q);
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (p[j] == 0.0) continue;
                g[j] = q[j] > 0.0 ? -std::pow(p[j] / q[j], alpha) / s : -kInf;
            }
            break;
        }
    }
    return g;
}

double total_variation_radius(const DivergenceKind& kind, double budget) {
    if (std::isnan(budget) || budget < 0.0) throw std::invalid_argument("budget must be nonnegative");
    double r = 1.0;
    switch (kind.kind()) {
        case DivergenceKind::Kind::TotalVariation: r = budget; break;
        case DivergenceKind::Kind::KullbackLeibler: r = std::sqrt(budget / 2.0); break;
        // TV <= sqrt(1 - BC^2) with Bhattacharyya coefficient BC = 1 - H^2.
        case DivergenceKind::Kind::Hellinger: r = budget >= 1.0 ? 1.0 : std::sqrt(budget * (2.0 - budget)); break;
        case DivergenceKind::Kind::RenyiAlpha: {
            // Orders >= 1 dominate KL; below 1, D_alpha >= 2 alpha TV^2.
            const double a = *kind.alpha();
            r = std::sqrt(budget / (2.0 * std::min(a, 1.0)));
            break;
        }
    }
    return std::min(r, 1.0);
}

double expected_distortion(const MixtureSource& src, const Channel& degrade, const Channel& restore,
                           const DistortionMatrix& delta) {
    if (src.alphabet() != degrade.input() || src.alphabet() != delta.from())
        throw DimensionError("expected_distortion: source, degradation and distortion alphabets differ");
    if (degrade.output() != restore.input())
        throw DimensionError("expected_distortion: degradation output != restoration input");
    if (restore.output() != delta.to())
        throw DimensionError("expected_distortion: restoration output != distortion target alphabet");

    const ProbVector px = src.marginal();
    const std::size_t nx = px.size(), ny = degrade.output().size(), nr = restore.output().size();
    double total = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
        if (px[x] == 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y) {
            const double wxy = px[x] * degrade(x, y);
            if (wxy == 0.0) continue;
            double inner = 0.0;
            for (std::size_t r = 0; r < nr; ++r) inner += restore(y, r) * delta(x, r);
            total += wxy * inner;
        }
    }
    return total;
}

}  // namespace cdp
