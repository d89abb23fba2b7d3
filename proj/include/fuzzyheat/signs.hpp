#pragma once

// Sampled sign analysis of expressions over the space-time box and the
// alpha = 0 parameter box.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fuzzyheat/expr.hpp"
#include "fuzzyheat/problem.hpp"

namespace fuzzyheat {

enum class Sign { positive, negative, zero, mixed };

const char* to_string(Sign s) noexcept;

struct SamplingConfig {
    int nodes_per_axis = 21;
    /// |value| must exceed this for a sample to count as strictly signed.
    double margin = 1e-10;
};

struct SamplePoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    std::map<std::string, double> parameters;
    double value = 0.0;
};

struct SpaceTimeBox {
    double t_lo = 0.0, t_hi = 0.0;
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;
};

struct SignEntry {
    std::string label;
    expr::Expression expression;
    Sign sign = Sign::zero;
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t zero = 0;
    std::optional<SamplePoint> positive_witness;
    std::optional<SamplePoint> negative_witness;
    /// Bounding box of the positive samples; set when any exist.
    std::optional<SpaceTimeBox> positive_region;
};

/// Direction of an expression in one parameter, read off the sign of its partial.
enum class Monotone { increasing, decreasing, mixed };

const char* to_string(Monotone m) noexcept;
Monotone monotone_from(const SignEntry& partial) noexcept;

struct SignProfile {
    SignEntry P;
    std::optional<SignEntry> Q;
    /// (dP/dg)(dG/dg), (dQ/db)(dG/db), (dG/dk)(dF/dk) for every parameter of P, Q and F.
    std::vector<SignEntry> products;
    /// partials[quantity][parameter], quantity in {"G", "F", "P", "Q", "initial"}.
    std::map<std::string, std::map<std::string, SignEntry>> partials;

    bool all_products_positive() const noexcept;
};

/// Coordinates sampled along one axis: uniform, open ends excluded.
std::vector<double> axis_samples(const AxisDomain& axis, int count);

/// Samples every space-time variable and parameter e depends on.
SignEntry sign_of(const expr::Expression& e, const HeatLikeProblem& p, const SamplingConfig& cfg = {},
                  std::string label = {});

/// Throws UsageError when G is absent.
SignProfile sign_profile(const HeatLikeProblem& p, const std::optional<expr::Expression>& G,
                         const SamplingConfig& cfg = {});

}  // namespace fuzzyheat
