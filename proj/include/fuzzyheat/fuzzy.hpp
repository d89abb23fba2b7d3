#pragma once

// Fuzzy numbers stored as a finite stack of nested alpha-cuts.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fuzzyheat {

/// Absolute slack used for every nesting and ordering comparison.
inline constexpr double kFuzzySlack = 1e-12;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    double mid() const noexcept { return 0.5 * (lo + hi); }
    bool contains(double v, double slack = 0.0) const noexcept { return v >= lo - slack && v <= hi + slack; }
    bool contains(const Interval& o, double slack = 0.0) const noexcept {
        return o.lo >= lo - slack && o.hi <= hi + slack;
    }
    bool is_point() const noexcept { return lo == hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
/// Throws DomainError when b contains zero.
Interval operator/(const Interval& a, const Interval& b);
Interval scale(const Interval& a, double k);

struct TriangularFuzzy {
    double u1 = 0.0;
    double u2 = 0.0;
    double u3 = 0.0;

    /// cut(a) = [u1 + a(u2-u1), u3 - a(u3-u2)]
    Interval cut(double alpha) const noexcept;
    bool is_crisp() const noexcept { return u1 == u3; }
};

/// Throws DomainError naming the out-of-order pair.
void check_triangular(double u1, double u2, double u3);

struct AlphaLevel {
    double alpha = 0.0;
    Interval cut;
};

/// alpha_i = i / (level_count - 1).
std::vector<double> uniform_alpha_grid(int level_count);

class AlphaLevelFuzzyNumber {
public:
    /// Validates the invariants; throws DomainError on violation.
    explicit AlphaLevelFuzzyNumber(std::vector<AlphaLevel> levels);

    const std::vector<AlphaLevel>& levels() const noexcept { return levels_; }
    std::size_t size() const noexcept { return levels_.size(); }
    double alpha(std::size_t i) const { return levels_.at(i).alpha; }
    const Interval& cut(std::size_t i) const { return levels_.at(i).cut; }
    const Interval& support() const { return levels_.front().cut; }
    const Interval& core() const { return levels_.back().cut; }

    bool same_grid(const AlphaLevelFuzzyNumber& other) const noexcept;

private:
    std::vector<AlphaLevel> levels_;
};

AlphaLevelFuzzyNumber make_triangular(double u1, double u2, double u3, int level_count = 11);
AlphaLevelFuzzyNumber make_triangular(const TriangularFuzzy& tri, int level_count = 11);
AlphaLevelFuzzyNumber make_crisp(double value, int level_count = 11);

AlphaLevelFuzzyNumber operator+(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b);
AlphaLevelFuzzyNumber operator-(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b);
AlphaLevelFuzzyNumber operator*(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b);
AlphaLevelFuzzyNumber operator/(const AlphaLevelFuzzyNumber& a, const AlphaLevelFuzzyNumber& b);
AlphaLevelFuzzyNumber scale(const AlphaLevelFuzzyNumber& a, double k);

struct FuzzyValidity {
    enum class Violation { none, crossing, lower_decreased, upper_increased, bad_alpha };

    Violation violation = Violation::none;
    std::size_t level = 0;  // index of the first offending level
    double alpha = 0.0;
    std::string message;

    bool valid() const noexcept { return violation == Violation::none; }
};

FuzzyValidity validate_fuzzy(std::span<const AlphaLevel> candidate, double slack = kFuzzySlack);

using FuzzyOrRejection = std::variant<AlphaLevelFuzzyNumber, FuzzyValidity>;

FuzzyOrRejection from_endpoint_samples(const std::function<double(double)>& lower,
                                       const std::function<double(double)>& upper, int level_count = 11);

/// Same, for cuts already sampled on a known alpha grid.
FuzzyOrRejection from_levels(std::vector<AlphaLevel> levels);

}  // namespace fuzzyheat
