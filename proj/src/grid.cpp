#include "fuzzyheat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fuzzyheat/errors.hpp"

namespace fuzzyheat {

namespace {

void check_axis(const Axis& a, const char* name) {
    if (!(std::isfinite(a.lo) && std::isfinite(a.hi)) || !(a.lo < a.hi)) {
        throw DomainError(std::string("axis ") + name + " needs finite bounds with lo < hi");
    }
    if (a.count < 3) throw DomainError(std::string("axis ") + name + " needs at least 3 nodes");
}

void require_same(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw UsageError("grid functions live on different grids");
}

}  // namespace

std::vector<double> Axis::nodes() const {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = node(i);
    return out;
}

void GridSpec::validate() const {
    check_axis(t, "t");
    check_axis(x, "x");
    if (y) check_axis(*y, "y");
}

GridFunction::GridFunction(GridSpec spec, double fill) : spec_(std::move(spec)) {
    spec_.validate();
    values_.assign(spec_.size(), fill);
}

GridFunction::GridFunction(GridSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.size()) throw DomainError("grid function size does not match its grid");
    require_finite();
}

void GridFunction::require_finite() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            std::size_t iy = i % spec_.ny();
            std::size_t ix = (i / spec_.ny()) % spec_.x.count;
            std::size_t it = i / spec_.space_size();
            std::string where = "t=" + std::to_string(spec_.t.node(it)) + " x=" + std::to_string(spec_.x.node(ix));
            if (spec_.y) where += " y=" + std::to_string(spec_.y->node(iy));
            throw NumericalError("non-finite value at " + where);
        }
    }
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    require_same(spec_, other.spec_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    require_same(spec_, other.spec_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(double k) {
    for (double& v : values_) v *= k;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double k, GridFunction a) { return a *= k; }

GridFunction second_derivative(const GridFunction& f, SpaceAxis axis) {
    const GridSpec& s = f.spec();
    if (axis == SpaceAxis::y && !s.y) throw UsageError("second derivative along y requested on a 1D grid");
    const Axis& ax = axis == SpaceAxis::x ? s.x : *s.y;
    const std::size_t n = ax.count;
    const double inv_h2 = 1.0 / (ax.step() * ax.step());
    // Offset between neighbours along the chosen axis in the flat layout.
    const std::size_t stride = axis == SpaceAxis::x ? s.ny() : 1;
    const bool four_point = n >= 4;

    GridFunction out(s);
    const auto& in = f.values();
    auto& res = out.values();
    for (std::size_t it = 0; it < s.t.count; ++it) {
        for (std::size_t ix = 0; ix < s.x.count; ++ix) {
            for (std::size_t iy = 0; iy < s.ny(); ++iy) {
                std::size_t i = axis == SpaceAxis::x ? ix : iy;
                std::size_t base = s.index(it, ix, iy) - i * stride;
                auto v = [&](std::size_t k) { return in[base + k * stride]; };
                double d;
                if (i > 0 && i + 1 < n) {
                    d = v(i - 1) - 2.0 * v(i) + v(i + 1);
                } else if (i == 0) {
                    d = four_point ? 2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3) : v(0) - 2.0 * v(1) + v(2);
                } else {
                    d = four_point ? 2.0 * v(n - 1) - 5.0 * v(n - 2) + 4.0 * v(n - 3) - v(n - 4)
                                   : v(n - 1) - 2.0 * v(n - 2) + v(n - 3);
                }
                res[s.index(it, ix, iy)] = d * inv_h2;
            }
        }
    }
    return out;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double h) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
}

GridFunction cumulative_time_integral(const GridFunction& f) {
    const GridSpec& s = f.spec();
    const double h = s.t.step();
    const std::size_t m = s.space_size();
    GridFunction out(s);
    const auto& in = f.values();
    auto& res = out.values();
    for (std::size_t it = 1; it < s.t.count; ++it) {
        for (std::size_t j = 0; j < m; ++j) {
            res[it * m + j] = res[(it - 1) * m + j] + 0.5 * h * (in[(it - 1) * m + j] + in[it * m + j]);
        }
    }
    return out;
}

GridFunction time_derivative(const GridFunction& f) {
    const GridSpec& s = f.spec();
    const double h = s.t.step();
    const std::size_t m = s.space_size();
    const std::size_t nt = s.t.count;
    GridFunction out(s);
    const auto& in = f.values();
    auto& res = out.values();
    for (std::size_t j = 0; j < m; ++j) {
        auto v = [&](std::size_t it) { return in[it * m + j]; };
        res[j] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
        for (std::size_t it = 1; it + 1 < nt; ++it) res[it * m + j] = (v(it + 1) - v(it - 1)) / (2.0 * h);
        res[(nt - 1) * m + j] = (3.0 * v(nt - 1) - 4.0 * v(nt - 2) + v(nt - 3)) / (2.0 * h);
    }
    return out;
}

double sup_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double sup_norm_diff(const GridFunction& a, const GridFunction& b) {
    require_same(a.spec(), b.spec());
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

}  // namespace fuzzyheat
