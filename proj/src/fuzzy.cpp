#include "fuzzyheat/fuzzy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fuzzyheat/errors.hpp"

namespace fuzzyheat {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

Interval hull(const std::array<double, 4>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, *hi};
}

template <class F>
AlphaLevelFuzzyNumber levelwise(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b, F&& f) {
    if (!a.same_grid(b)) throw UsageError("fuzzy operands use different alpha grids");
    std::vector<AlphaLevel> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back({a.alpha(i), f(a.cut(i), b.cut(i))});
    return AlphaLevelFuzzyNumber(std::move(out));
}

}  // namespace

Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }

Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }

Interval operator*(const Interval& a, const Interval& b) {
    return hull({a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi});
}

Interval operator/(const Interval& a, const Interval& b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) {
        throw DomainError("division by an interval containing zero [" + fmt(b.lo) + ", " + fmt(b.hi) + "]");
    }
    return hull({a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi});
}

Interval scale(const Interval& a, double k) {
    if (k >= 0.0) return {k * a.lo, k * a.hi};
    return {k * a.hi, k * a.lo};
}

Interval TriangularFuzzy::cut(double alpha) const noexcept {
    if (alpha >= 1.0) return {u2, u2};
    return {u1 + alpha * (u2 - u1), u3 - alpha * (u3 - u2)};
}

void check_triangular(double u1, double u2, double u3) {
    if (!(std::isfinite(u1) && std::isfinite(u2) && std::isfinite(u3))) {
        throw DomainError("triangular fuzzy number has a non-finite vertex");
    }
    if (u1 > u2) throw DomainError("triangular fuzzy number needs u1 <= u2, got u1=" + fmt(u1) + " u2=" + fmt(u2));
    if (u2 > u3) throw DomainError("triangular fuzzy number needs u2 <= u3, got u2=" + fmt(u2) + " u3=" + fmt(u3));
}

std::vector<double> uniform_alpha_grid(int level_count) {
    if (level_count < 2) throw DomainError("alpha grid needs at least 2 levels");
    std::vector<double> grid(static_cast<std::size_t>(level_count));
    for (int i = 0; i < level_count; ++i) grid[i] = static_cast<double>(i) / (level_count - 1);
    grid.back() = 1.0;
    return grid;
}

AlphaLevelFuzzyNumber::AlphaLevelFuzzyNumber(std::vector<AlphaLevel> levels) : levels_(std::move(levels)) {
    FuzzyValidity v = validate_fuzzy(levels_);
    if (!v.valid()) throw DomainError("not a fuzzy number: " + v.message);
    if (levels_.front().alpha != 0.0 || levels_.back().alpha != 1.0) {
        throw DomainError("alpha levels must start at 0 and end at 1");
    }
}

bool AlphaLevelFuzzyNumber::same_grid(const AlphaLevelFuzzyNumber& other) const noexcept {
    if (levels_.size() != other.levels_.size()) return false;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (levels_[i].alpha != other.levels_[i].alpha) return false;
    }
    return true;
}

AlphaLevelFuzzyNumber make_triangular(double u1, double u2, double u3, int level_count) {
    check_triangular(u1, u2, u3);
    return make_triangular(TriangularFuzzy{u1, u2, u3}, level_count);
}

AlphaLevelFuzzyNumber make_triangular(const TriangularFuzzy& tri, int level_count) {
    check_triangular(tri.u1, tri.u2, tri.u3);
    std::vector<AlphaLevel> levels;
    for (double a : uniform_alpha_grid(level_count)) levels.push_back({a, tri.cut(a)});
    return AlphaLevelFuzzyNumber(std::move(levels));
}

AlphaLevelFuzzyNumber make_crisp(double value, int level_count) {
    return make_triangular(value, value, value, level_count);
}

AlphaLevelFuzzyNumber operator+(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b) {
    return levelwise(a, b, [](const Interval& x, const Interval& y) { return x + y; });
}

AlphaLevelFuzzyNumber operator-(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b) {
    return levelwise(a, b, [](const Interval& x, const Interval& y) { return x - y; });
}

AlphaLevelFuzzyNumber operator*(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b) {
    return levelwise(a, b, [](const Interval& x, const Interval& y) { return x * y; });
}

AlphaLevelFuzzyNumber operator/(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b) {
    // The support contains every other cut, so checking it once is enough.
    const Interval& s = b.support();
    if (s.lo <= 0.0 && s.hi >= 0.0) {
        throw DomainError("divisor support [" + fmt(s.lo) + ", " + fmt(s.hi) + "] contains zero");
    }
    return levelwise(a, b, [](const Interval& x, const Interval& y) { return x / y; });
}

AlphaLevelFuzzyNumber scale(const AlphaLevelFuzzyNumber& a, double k) {
    std::vector<AlphaLevel> out;
    out.reserve(a.size());
    for (const AlphaLevel& l : a.levels()) out.push_back({l.alpha, scale(l.cut, k)});
    return AlphaLevelFuzzyNumber(std::move(out));
}

FuzzyValidity validate_fuzzy(std::span<const AlphaLevel> candidate, double slack) {
    using V = FuzzyValidity::Violation;
    FuzzyValidity r;
    if (candidate.empty()) {
        r.violation = V::bad_alpha;
        r.message = "no alpha levels";
        return r;
    }
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        const AlphaLevel& l = candidate[i];
        auto fail = [&](V v, std::string msg) {
            r.violation = v;
            r.level = i;
            r.alpha = l.alpha;
            r.message = std::move(msg) + " at alpha=" + fmt(l.alpha);
            return r;
        };
        if (!(l.alpha >= 0.0 && l.alpha <= 1.0) || (i > 0 && l.alpha <= candidate[i - 1].alpha)) {
            return fail(V::bad_alpha, "alpha values must be strictly increasing in [0,1]");
        }
        if (!std::isfinite(l.cut.lo) || !std::isfinite(l.cut.hi)) return fail(V::crossing, "non-finite endpoint");
        if (l.cut.lo > l.cut.hi + slack) return fail(V::crossing, "lower endpoint exceeds upper endpoint");
        if (i > 0) {
            const Interval& prev = candidate[i - 1].cut;
            if (l.cut.lo < prev.lo - slack) return fail(V::lower_decreased, "lower endpoint decreased");
            if (l.cut.hi > prev.hi + slack) return fail(V::upper_increased, "upper endpoint increased");
        }
    }
    return r;
}

FuzzyOrRejection from_levels(std::vector<AlphaLevel> levels) {
    FuzzyValidity v = validate_fuzzy(levels);
    if (!v.valid()) return v;
    if (levels.front().alpha != 0.0 || levels.back().alpha != 1.0) {
        v.violation = FuzzyValidity::Violation::bad_alpha;
        v.message = "alpha levels must start at 0 and end at 1";
        return v;
    }
    return AlphaLevelFuzzyNumber(std::move(levels));
}

FuzzyOrRejection from_endpoint_samples(const std::function<double(double)>& lower,
                                       const std::function<double(double)>& upper, int level_count) {
    std::vector<AlphaLevel> levels;
    for (double a : uniform_alpha_grid(level_count)) levels.push_back({a, {lower(a), upper(a)}});
    return from_levels(std::move(levels));
}

}  // namespace fuzzyheat
