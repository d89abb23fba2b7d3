#pragma once

// Uniform tensor-product grids over (t, x[, y]) and fields stored on them.

#include <cstddef>
#include <optional>
#include <vector>

namespace fuzzyheat {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t count = 101;

    double step() const noexcept { return (hi - lo) / static_cast<double>(count - 1); }
    double node(std::size_t i) const noexcept { return i + 1 == count ? hi : lo + step() * static_cast<double>(i); }
    std::vector<double> nodes() const;

    friend bool operator==(const Axis&, const Axis&) = default;
};

enum class SpaceAxis { x, y };

struct GridSpec {
    Axis t;
    Axis x;
    std::optional<Axis> y;

    /// Throws DomainError unless bounds are ordered and every count is >= 3.
    void validate() const;

    int dimension() const noexcept { return y ? 2 : 1; }
    std::size_t ny() const noexcept { return y ? y->count : 1; }
    std::size_t space_size() const noexcept { return x.count * ny(); }
    std::size_t size() const noexcept { return t.count * space_size(); }
    std::size_t index(std::size_t it, std::size_t ix, std::size_t iy = 0) const noexcept {
        return (it * x.count + ix) * ny() + iy;
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(GridSpec spec, double fill = 0.0);
    /// Throws DomainError on a size mismatch or a non-finite entry.
    GridFunction(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const noexcept { return spec_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    double& at(std::size_t it, std::size_t ix, std::size_t iy = 0) { return values_[spec_.index(it, ix, iy)]; }
    double at(std::size_t it, std::size_t ix, std::size_t iy = 0) const { return values_[spec_.index(it, ix, iy)]; }

    /// Throws NumericalError naming the first non-finite node.
    void require_finite() const;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double k);

private:
    GridSpec spec_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double k, GridFunction a);

/// Central differences inside, second-order one-sided stencils on the two boundary planes.
GridFunction second_derivative(const GridFunction& f, SpaceAxis axis);

/// Trapezoidal cumulative integral along t, zero on the t0 plane.
GridFunction cumulative_time_integral(const GridFunction& f);

/// Same along a single series of equally spaced samples.
std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double h);

/// Second-order time derivative: central inside, one-sided at both ends.
GridFunction time_derivative(const GridFunction& f);

double sup_norm(const GridFunction& f);
double sup_norm_diff(const GridFunction& a, const GridFunction& b);

}  // namespace fuzzyheat
