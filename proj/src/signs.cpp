#include "fuzzyheat/signs.hpp"

#include <algorithm>
#include <cmath>

#include "fuzzyheat/errors.hpp"

namespace fuzzyheat {

namespace ex = fuzzyheat::expr;

const char* to_string(Sign s) noexcept {
    switch (s) {
        case Sign::positive: return "+";
        case Sign::negative: return "-";
        case Sign::zero: return "0";
        case Sign::mixed: return "mixed";
    }
    return "?";
}

const char* to_string(Monotone m) noexcept {
    switch (m) {
        case Monotone::increasing: return "increasing";
        case Monotone::decreasing: return "decreasing";
        case Monotone::mixed: return "mixed";
    }
    return "?";
}

Monotone monotone_from(const SignEntry& partial) noexcept {
    if (partial.negative == 0) return Monotone::increasing;
    if (partial.positive == 0) return Monotone::decreasing;
    return Monotone::mixed;
}

bool SignProfile::all_products_positive() const noexcept {
    return std::all_of(products.begin(), products.end(), [](const SignEntry& e) { return e.sign == Sign::positive; });
}

std::vector<double> axis_samples(const AxisDomain& a, int count) {
    if (count < 2) throw DomainError("need at least 2 samples per axis");
    std::vector<double> out(static_cast<std::size_t>(count));
    const double w = a.hi - a.lo;
    // Open ends shift the lattice inward so the excluded endpoint is never hit.
    const int shift = a.open_lo ? 1 : 0;
    const int denom = (count - 1) + (a.open_lo ? 1 : 0) + (a.open_hi ? 1 : 0);
    for (int i = 0; i < count; ++i) out[i] = a.lo + w * static_cast<double>(i + shift) / denom;
    if (!a.open_hi) out.back() = a.hi;
    return out;
}

SignEntry sign_of(const ex::Expression& e_in, const HeatLikeProblem& p, const SamplingConfig& cfg,
                  std::string label) {
    ex::Expression e = ex::simplify(e_in);
    SignEntry entry;
    entry.label = std::move(label);
    entry.expression = e;

    std::vector<std::string> slots{"t", "x", "y"};
    std::vector<std::vector<double>> values(3);
    values[0] = ex::depends_on(e, "t") ? axis_samples(p.domain.t, cfg.nodes_per_axis) : std::vector<double>{p.domain.t.hi};
    values[1] = ex::depends_on(e, "x") ? axis_samples(p.domain.x, cfg.nodes_per_axis) : std::vector<double>{p.domain.x.hi};
    if (ex::depends_on(e, "y")) {
        if (!p.domain.y) throw ValidationError("expression uses y in a 1D problem");
        values[2] = axis_samples(*p.domain.y, cfg.nodes_per_axis);
    } else {
        values[2] = {0.0};
    }
    for (const FuzzyParameter& fp : p.parameters) {
        slots.push_back(fp.name);
        Interval s = fp.cut(0.0);
        if (!ex::depends_on(e, fp.name) || s.lo == s.hi) {
            values.push_back({fp.shape.u2});
        } else {
            values.push_back({s.lo, 0.5 * (s.lo + s.hi), s.hi});
        }
    }
    for (const std::string& s : ex::free_symbols(e)) {
        if (std::find(slots.begin(), slots.end(), s) == slots.end()) {
            throw ValidationError("symbol '" + s + "' is neither a variable nor a declared parameter");
        }
    }

    ex::CompiledExpression f(e, slots);
    const std::size_t dims = slots.size();
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> point(dims);
    auto record = [&](double v) {
        SamplePoint sp{point[0], point[1], point[2], {}, v};
        for (std::size_t d = 3; d < dims; ++d) sp.parameters[slots[d]] = point[d];
        return sp;
    };
    for (;;) {
        for (std::size_t d = 0; d < dims; ++d) point[d] = values[d][idx[d]];
        double v;
        try {
            v = f(point);
        } catch (const EvaluationError& err) {
            throw EvaluationError(std::string(err.what()) + " while sampling " + entry.label, err.subexpression());
        }
        if (!std::isfinite(v)) throw NumericalError("non-finite sample of " + entry.label);
        if (v > cfg.margin) {
            ++entry.positive;
            if (!entry.positive_witness) entry.positive_witness = record(v);
            if (!entry.positive_region) {
                entry.positive_region = SpaceTimeBox{point[0], point[0], point[1], point[1], point[2], point[2]};
            } else {
                SpaceTimeBox& b = *entry.positive_region;
                b.t_lo = std::min(b.t_lo, point[0]);
                b.t_hi = std::max(b.t_hi, point[0]);
                b.x_lo = std::min(b.x_lo, point[1]);
                b.x_hi = std::max(b.x_hi, point[1]);
                b.y_lo = std::min(b.y_lo, point[2]);
                b.y_hi = std::max(b.y_hi, point[2]);
            }
        } else if (v < -cfg.margin) {
            ++entry.negative;
            if (!entry.negative_witness) entry.negative_witness = record(v);
        } else {
            ++entry.zero;
        }
        std::size_t d = 0;
        while (d < dims && ++idx[d] == values[d].size()) idx[d++] = 0;
        if (d == dims) break;
    }

    if (entry.positive > 0 && entry.negative > 0) {
        entry.sign = Sign::mixed;
    } else if (entry.zero > 0) {
        // A strict sign needs every sample away from zero.
        entry.sign = Sign::zero;
    } else {
        entry.sign = entry.positive > 0 ? Sign::positive : Sign::negative;
    }
    return entry;
}

SignProfile sign_profile(const HeatLikeProblem& p, const std::optional<ex::Expression>& G, const SamplingConfig& cfg) {
    if (!G) {
        throw UsageError(
            "no closed-form solution G: supply one with --oracle or pick a registered example; the VIM grid solution "
            "alone cannot be differentiated in the parameters");
    }
    SignProfile prof;
    prof.P = sign_of(p.P, p, cfg, "P");
    if (p.Q) prof.Q = sign_of(*p.Q, p, cfg, "Q");

    std::map<std::string, ex::Expression> quantities{{"G", *G}, {"F", p.F}, {"P", p.P}, {"initial", p.initial}};
    if (p.Q) quantities["Q"] = *p.Q;
    for (const auto& [name, e] : quantities) {
        for (const FuzzyParameter& fp : p.parameters) {
            if (!ex::depends_on(e, fp.name)) continue;
            prof.partials[name][fp.name] =
                sign_of(ex::differentiate(e, fp.name), p, cfg, "d" + name + "/d" + fp.name);
        }
    }

    auto add_products = [&](const ex::Expression& coeff, const char* coeff_name) {
        for (const FuzzyParameter& fp : p.parameters) {
            if (!ex::depends_on(coeff, fp.name)) continue;
            ex::Expression prod = ex::differentiate(coeff, fp.name) * ex::differentiate(*G, fp.name);
            std::string label = std::string("(d") + coeff_name + "/d" + fp.name + ")(dG/d" + fp.name + ")";
            prof.products.push_back(sign_of(prod, p, cfg, label));
        }
    };
    add_products(p.P, "P");
    if (p.Q) add_products(*p.Q, "Q");
    for (const FuzzyParameter& fp : p.parameters) {
        if (!ex::depends_on(p.F, fp.name)) continue;
        ex::Expression prod = ex::differentiate(*G, fp.name) * ex::differentiate(p.F, fp.name);
        prof.products.push_back(sign_of(prod, p, cfg, "(dG/d" + fp.name + ")(dF/d" + fp.name + ")"));
    }
    return prof;
}

}  // namespace fuzzyheat
