#include "cdp/prob_core.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace cdp {

namespace {

void check_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("blend weight must lie in [0,1], got " + std::to_string(lambda));
}

// Validates one mass vector in place; renormalizes small drift.
void normalize_mass(std::span<double> mass, const char* what) {
    if (mass.empty())
        throw InvalidDistribution(std::string(what) + ": empty mass vector");
    double total = 0.0;
    for (double m : mass) {
        if (!std::isfinite(m) || m < 0.0)
            throw InvalidDistribution(std::string(what) + ": entries must be finite and nonnegative");
        total += m;
    }
    const double drift = std::abs(total - 1.0);
    if (drift > kRenormalizeLimit)
        throw InvalidDistribution(std::string(what) + ": mass sums to " + std::to_string(total));
    if (drift > 0.0)
        for (double& m : mass) m /= total;
}

}  // namespace

Alphabet::Alphabet(std::size_t size) : size_(size) {
    if (size == 0) throw std::invalid_argument("alphabet size must be at least 1");
}

ProbVector::ProbVector(std::vector<double> mass) : mass_(std::move(mass)) {
    normalize_mass(mass_, "ProbVector");
}

ProbVector ProbVector::uniform(std::size_t size) {
    Alphabet a(size);
    return ProbVector(std::vector<double>(a.size(), 1.0 / static_cast<double>(a.size())));
}

ProbVector ProbVector::point_mass(std::size_t size, std::size_t symbol) {
    if (symbol >= size) throw DimensionError("point mass symbol outside alphabet");
    std::vector<double> m(size, 0.0);
    m[symbol] = 1.0;
    return ProbVector(std::move(m));
}

ProbVector ProbVector::blend(const ProbVector& other, double lambda) const {
    check_lambda(lambda);
    if (other.size() != size()) throw DimensionError("ProbVector::blend: alphabet mismatch");
    std::vector<double> m(size());
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = lambda * mass_[i] + (1.0 - lambda) * other.mass_[i];
    return ProbVector(std::move(m));
}

Channel::Channel(Alphabet input, Alphabet output, std::vector<double> row_major)
    : inputs_(input.size()), outputs_(output.size()), entries_(std::move(row_major)) {
    if (entries_.size() != inputs_ * outputs_)
        throw DimensionError("Channel: expected " + std::to_string(inputs_ * outputs_) + " entries, got " +
                             std::to_string(entries_.size()));
    for (std::size_t i = 0; i < inputs_; ++i)
        normalize_mass(std::span<double>(entries_).subspan(i * outputs_, outputs_), "Channel row");
}

namespace {

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("Channel: no rows");
    std::vector<double> flat;
    flat.reserve(rows.size() * rows.front().size());
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw DimensionError("Channel: ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return flat;
}

}  // namespace

Channel::Channel(const std::vector<std::vector<double>>& rows)
    : Channel(Alphabet(rows.size()), Alphabet(rows.empty() ? 0 : rows.front().size()), flatten(rows)) {}

Channel Channel::identity(std::size_t size) {
    std::vector<double> e(size * size, 0.0);
    for (std::size_t i = 0; i < size; ++i) e[i * size + i] = 1.0;
    return Channel(Alphabet(size), Alphabet(size), std::move(e));
}

Channel Channel::constant(std::size_t input_size, const ProbVector& row) {
    std::vector<double> e;
    e.reserve(input_size * row.size());
    for (std::size_t i = 0; i < input_size; ++i) e.insert(e.end(), row.mass().begin(), row.mass().end());
    return Channel(Alphabet(input_size), row.alphabet(), std::move(e));
}

Channel Channel::deterministic(std::size_t output_size, std::span<const std::size_t> target) {
    std::vector<double> e(target.size() * output_size, 0.0);
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] >= output_size) throw DimensionError("deterministic channel target outside output alphabet");
        e[i * output_size + target[i]] = 1.0;
    }
    return Channel(Alphabet(target.size()), Alphabet(output_size), std::move(e));
}

Channel Channel::binary_symmetric(double flip) {
    check_lambda(flip);
    return Channel(Alphabet(2), Alphabet(2), {1.0 - flip, flip, flip, 1.0 - flip});
}

std::span<const double> Channel::row(std::size_t in) const {
    if (in >= inputs_) throw DimensionError("Channel::row: input symbol out of range");
    return std::span<const double>(entries_).subspan(in * outputs_, outputs_);
}

ProbVector Channel::apply(const ProbVector& p) const {
    if (p.size() != inputs_) throw DimensionError("Channel::apply: alphabet mismatch");
    std::vector<double> out(outputs_, 0.0);
    for (std::size_t i = 0; i < inputs_; ++i) {
        const double w = p[i];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < outputs_; ++j) out[j] += w * entries_[i * outputs_ + j];
    }
    return ProbVector(std::move(out));
}

Channel Channel::blend(const Channel& other, double lambda) const {
    check_lambda(lambda);
    if (other.inputs_ != inputs_ || other.outputs_ != outputs_)
        throw DimensionError("Channel::blend: shape mismatch");
    std::vector<double> e(entries_.size());
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = lambda * entries_[k] + (1.0 - lambda) * other.entries_[k];
    return Channel(input(), output(), std::move(e));
}

MixtureSource::MixtureSource(double prior1, double prior2, ProbVector class1, ProbVector class2)
    : prior1_(prior1), prior2_(prior2), class1_(std::move(class1)), class2_(std::move(class2)) {
    if (class1_.size() != class2_.size())
        throw DimensionError("MixtureSource: class-conditionals on different alphabets");
    double priors[2] = {prior1_, prior2_};
    normalize_mass(priors, "MixtureSource priors");
    prior1_ = priors[0];
    prior2_ = priors[1];
}

ProbVector MixtureSource::marginal() const {
    std::vector<double> m(class1_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = prior1_ * class1_[i] + prior2_ * class2_[i];
    return ProbVector(std::move(m));
}

MixtureSource push_forward(const MixtureSource& src, const Channel& ch) {
    if (src.alphabet() != ch.input()) throw DimensionError("push_forward: source alphabet != channel input");
    return MixtureSource(src.prior1(), src.prior2(), ch.apply(src.class1()), ch.apply(src.class2()));
}

Channel compose(const Channel& first, const Channel& second) {
    if (first.output() != second.input()) throw DimensionError("compose: inner alphabets differ");
    const std::size_t n = first.input().size(), m = first.output().size(), k = second.output().size();
    std::vector<double> e(n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double a = first(i, j);
            if (a == 0.0) continue;
            for (std::size_t l = 0; l < k; ++l) e[i * k + l] += a * second(j, l);
        }
    return Channel(first.input(), second.output(), std::move(e));
}

MixtureSource mix_mixtures(const MixtureSource& u, const MixtureSource& v, double lambda) {
    if (u.alphabet() != v.alphabet()) throw InvalidMixture("mix_mixtures: alphabets differ");
    if (std::abs(u.prior1() - v.prior1()) > kMassTolerance || std::abs(u.prior2() - v.prior2()) > kMassTolerance)
        throw InvalidMixture("mix_mixtures: priors differ");
    check_lambda(lambda);
    return MixtureSource(u.prior1(), u.prior2(), u.class1().blend(v.class1(), lambda),
                         u.class2().blend(v.class2(), lambda));
}

}  // namespace cdp
