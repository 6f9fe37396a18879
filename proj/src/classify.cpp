#include "cdp/classify.hpp"

#include <algorithm>
#include <cmath>

namespace cdp {

DecisionRegion::DecisionRegion(std::vector<bool> members) : members_(std::move(members)) {
    static_cast<void>(Alphabet(members_.size()));
}

DecisionRegion::DecisionRegion(std::size_t size, std::initializer_list<std::size_t> symbols)
    : members_(Alphabet(size).size(), false) {
    for (std::size_t s : symbols) {
        if (s >= size) throw DimensionError("DecisionRegion: symbol outside alphabet");
        members_[s] = true;
    }
}

DecisionRegion DecisionRegion::empty(std::size_t size) { return DecisionRegion(std::vector<bool>(size, false)); }

DecisionRegion DecisionRegion::full(std::size_t size) { return DecisionRegion(std::vector<bool>(size, true)); }

DecisionRegion DecisionRegion::from_mask(std::size_t size, unsigned long long mask) {
    if (size > 63) throw SizeError("DecisionRegion::from_mask: alphabet too large");
    std::vector<bool> m(size);
    for (std::size_t i = 0; i < size; ++i) m[i] = ((mask >> i) & 1ULL) != 0;
    return DecisionRegion(std::move(m));
}

std::size_t DecisionRegion::count() const noexcept {
    return static_cast<std::size_t>(std::count(members_.begin(), members_.end(), true));
}

DecisionRegion DecisionRegion::complement() const {
    std::vector<bool> m(members_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = !members_[i];
    return DecisionRegion(std::move(m));
}

std::vector<std::size_t> DecisionRegion::symbols() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < members_.size(); ++i)
        if (members_[i]) out.push_back(i);
    return out;
}

double error_rate(const MixtureSource& src, const DecisionRegion& region) {
    if (region.alphabet() != src.alphabet()) throw DimensionError("error_rate: region and source alphabets differ");
    double inside2 = 0.0, outside1 = 0.0;
    for (std::size_t x = 0; x < region.size(); ++x) {
        if (region.contains(x))
            inside2 += src.class2()[x];
        else
            outside1 += src.class1()[x];
    }
    return src.prior2() * inside2 + src.prior1() * outside1;
}

DecisionRegion bayes_region(const MixtureSource& src) {
    std::vector<bool> m(src.alphabet().size());
    for (std::size_t x = 0; x < m.size(); ++x)
        m[x] = src.prior1() * src.class1()[x] >= src.prior2() * src.class2()[x];
    return DecisionRegion(std::move(m));
}

RegionPartition region_partition(const MixtureSource& src) {
    const std::size_t n = src.alphabet().size();
    std::vector<bool> plus(n), minus(n), zero(n);
    for (std::size_t x = 0; x < n; ++x) {
        const double diff = src.prior1() * src.class1()[x] - src.prior2() * src.class2()[x];
        if (std::abs(diff) <= kTieTolerance)
            zero[x] = true;
        else if (diff > 0.0)
            plus[x] = true;
        else
            minus[x] = true;
    }
    return {DecisionRegion(std::move(plus)), DecisionRegion(std::move(minus)), DecisionRegion(std::move(zero))};
}

double bayes_error(const MixtureSource& src) {
    double total = 0.0;
    for (std::size_t x = 0; x < src.alphabet().size(); ++x)
        total += std::min(src.prior1() * src.class1()[x], src.prior2() * src.class2()[x]);
    return total;
}

double bayes_error_l1_form(const MixtureSource& src) {
    double l1 = 0.0;
    for (std::size_t x = 0; x < src.alphabet().size(); ++x)
        l1 += std::abs(src.prior1() * src.class1()[x] - src.prior2() * src.class2()[x]);
    return 0.5 - 0.5 * l1;
}

bool dpi_equality_holds(const MixtureSource& src, const Channel& ch) {
    if (src.alphabet() != ch.input()) throw DimensionError("dpi_equality_holds: source alphabet != channel input");
    const RegionPartition part = region_partition(src);
    for (std::size_t y = 0; y < ch.output().size(); ++y) {
        bool from_plus = false, from_minus = false;
        for (std::size_t x = 0; x < ch.input().size(); ++x) {
            if (ch(x, y) == 0.0) continue;
            from_plus = from_plus || part.plus.contains(x);
            from_minus = from_minus || part.minus.contains(x);
        }
        if (from_plus && from_minus) return false;
    }
    return true;
}

}  // namespace cdp
