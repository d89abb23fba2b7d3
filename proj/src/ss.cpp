#include "fuzzyheat/ss.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "fuzzyheat/errors.hpp"

namespace fuzzyheat {

namespace ex = fuzzyheat::expr;

namespace {

const std::map<std::string, SignEntry>& partials_of(const SignProfile& prof, const std::string& name) {
    static const std::map<std::string, SignEntry> none;
    auto it = prof.partials.find(name);
    return it == prof.partials.end() ? none : it->second;
}

/// Returns true when the term must be cross-coupled.
bool coupling_for(const SignEntry& coeff, const char* name) {
    if (coeff.sign == Sign::positive) return false;
    if (coeff.sign == Sign::negative) return true;
    std::ostringstream os;
    os << "the Seikkala system needs a definite sign of " << name << " on the domain, found " << to_string(coeff.sign);
    if (coeff.positive_witness && coeff.negative_witness) {
        os << " (positive at t=" << coeff.positive_witness->t << " x=" << coeff.positive_witness->x
           << ", negative at t=" << coeff.negative_witness->t << " x=" << coeff.negative_witness->x << ")";
    }
    throw ValidationError(os.str());
}

struct Rect {
    std::size_t r_lo = 0, r_end = 0, c_lo = 0, c_end = 0;
    std::size_t area() const { return (r_end - r_lo) * (c_end - c_lo); }
};

/// Largest all-true rectangle of a rows x cols boolean matrix.
Rect max_rectangle(const std::vector<std::uint8_t>& b, std::size_t rows, std::size_t cols) {
    Rect best;
    std::vector<std::size_t> height(cols, 0);
    std::vector<std::size_t> stack;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) height[c] = b[r * cols + c] ? height[c] + 1 : 0;
        stack.clear();
        for (std::size_t c = 0; c <= cols; ++c) {
            std::size_t h = c < cols ? height[c] : 0;
            while (!stack.empty() && height[stack.back()] >= h) {
                std::size_t top = stack.back();
                stack.pop_back();
                std::size_t hh = height[top];
                std::size_t lo = stack.empty() ? 0 : stack.back() + 1;
                if (hh * (c - lo) > best.area()) best = Rect{r + 1 - hh, r + 1, lo, c};
            }
            stack.push_back(c);
        }
    }
    return best;
}

}  // namespace

const char* to_string(Coupling c) noexcept {
    switch (c) {
        case Coupling::uncoupled: return "uncoupled";
        case Coupling::cross_coupled_x: return "cross_coupled_x";
        case Coupling::cross_coupled_y: return "cross_coupled_y";
        case Coupling::cross_coupled_both: return "cross_coupled_both";
    }
    return "?";
}

VimSystem SeikkalaSystem::at(double alpha) const {
    VimSystem sys;
    for (int i = 0; i < 2; ++i) {
        VimEquation eq;
        eq.initial = ex::simplify(initial[i].at(alpha));
        eq.F = ex::simplify(f[i].at(alpha));
        eq.Pxx = ex::simplify(pxx[i].at(alpha));
        eq.xx_source = xx_source[i];
        if (qyy[i]) eq.Qyy = ex::simplify(qyy[i]->at(alpha));
        eq.yy_source = yy_source[i];
        sys.equations.push_back(std::move(eq));
    }
    return sys;
}

SignProfile coefficient_profile(const HeatLikeProblem& p, const SamplingConfig& cfg) {
    SignProfile prof;
    prof.P = sign_of(p.P, p, cfg, "P");
    if (p.Q) prof.Q = sign_of(*p.Q, p, cfg, "Q");
    std::map<std::string, ex::Expression> quantities{{"F", p.F}, {"P", p.P}, {"initial", p.initial}};
    if (p.Q) quantities["Q"] = *p.Q;
    for (const auto& [name, e] : quantities) {
        for (const FuzzyParameter& fp : p.parameters) {
            if (!ex::depends_on(e, fp.name)) continue;
            prof.partials[name][fp.name] = sign_of(ex::differentiate(e, fp.name), p, cfg, "d" + name + "/d" + fp.name);
        }
    }
    return prof;
}

SeikkalaSystem assemble_system(const HeatLikeProblem& p, const SignProfile& prof) {
    if (p.dimension == 2 && !prof.Q) throw UsageError("sign profile lacks Q for a 2D problem");
    const bool eq3 = p.dimension == 2 && p.orientation == Orientation::eq3;
    SeikkalaSystem sys;

    auto bind = [&](const ex::Expression& e, const std::string& name, BoundEndpoint out[2]) {
        out[0] = monotone_endpoint(p, e, partials_of(prof, name), Endpoint::lower);
        out[1] = monotone_endpoint(p, e, partials_of(prof, name), Endpoint::upper);
    };

    const char* xx_name = eq3 ? "Q" : "P";
    const SignEntry& xx_sign = eq3 ? *prof.Q : prof.P;
    bool cross_x = coupling_for(xx_sign, xx_name);
    bind(p.xx_coefficient(), xx_name, sys.pxx);
    sys.xx_source[0] = cross_x ? 1 : 0;
    sys.xx_source[1] = cross_x ? 0 : 1;

    bool cross_y = false;
    if (p.dimension == 2) {
        const char* yy_name = eq3 ? "P" : "Q";
        const SignEntry& yy_sign = eq3 ? prof.P : *prof.Q;
        cross_y = coupling_for(yy_sign, yy_name);
        BoundEndpoint q[2];
        bind(*p.yy_coefficient(), yy_name, q);
        sys.qyy[0] = std::move(q[0]);
        sys.qyy[1] = std::move(q[1]);
        sys.yy_source[0] = cross_y ? 1 : 0;
        sys.yy_source[1] = cross_y ? 0 : 1;
    }
    sys.coupling = cross_x && cross_y ? Coupling::cross_coupled_both
                   : cross_x         ? Coupling::cross_coupled_x
                   : cross_y         ? Coupling::cross_coupled_y
                                     : Coupling::uncoupled;

    bind(p.F, "F", sys.f);
    bind(p.initial, "initial", sys.initial);
    return sys;
}

SsLevel solve_ss(const SeikkalaSystem& sys, double alpha, const GridSpec& grid, const VimConfig& cfg) {
    VimSystemResult r = solve_system(sys.at(alpha), grid, cfg);
    if (r.diverged || !r.converged) {
        std::ostringstream os;
        os << "Seikkala system at alpha=" << alpha << (r.diverged ? " diverged" : " did not converge") << " after "
           << r.iterations_used << " iterations";
        if (!r.diagnostic.empty()) os << ": " << r.diagnostic;
        throw NumericalError(os.str());
    }
    return SsLevel{alpha, std::move(r.solutions[0]), std::move(r.solutions[1]), r.iterations_used, r.final_delta};
}

ValidityRegion validity_region(const std::vector<SsLevel>& levels) {
    if (levels.size() < 3) throw UsageError("validity needs at least 3 alpha levels");
    const GridSpec& g = levels.front().u1.spec();
    for (std::size_t a = 0; a < levels.size(); ++a) {
        if (!(levels[a].u1.spec() == g) || !(levels[a].u2.spec() == g)) {
            throw UsageError("alpha levels are on different grids");
        }
        if (a > 0 && !(levels[a].alpha > levels[a - 1].alpha)) throw UsageError("alpha levels must increase");
    }

    ValidityRegion v;
    v.grid = g;
    v.mask.assign(g.size(), 1);
    auto tol = [](double a, double b) { return 1e-8 * (1.0 + std::max(std::abs(a), std::abs(b))); };
    for (std::size_t n = 0; n < g.size(); ++n) {
        bool ok = true;
        for (std::size_t a = 0; a < levels.size() && ok; ++a) {
            double lo = levels[a].u1.values()[n], hi = levels[a].u2.values()[n];
            if (lo > hi + tol(lo, hi)) ok = false;
            if (a > 0) {
                double plo = levels[a - 1].u1.values()[n], phi = levels[a - 1].u2.values()[n];
                if (lo < plo - tol(lo, plo) || hi > phi + tol(hi, phi)) ok = false;
            }
        }
        v.mask[n] = ok ? 1 : 0;
        v.valid_nodes += ok ? 1 : 0;
    }

    // Column heights: consecutive valid nodes counted up from the t0 plane.
    const std::size_t nt = g.t.count, nx = g.x.count, ny = g.ny();
    std::vector<std::size_t> h(nx * ny, 0);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            std::size_t k = 0;
            while (k < nt && v.valid(k, ix, iy)) ++k;
            h[ix * ny + iy] = k;
        }
    }

    std::size_t min_h = *std::min_element(h.begin(), h.end());
    if (min_h > 0) v.t_band_end = g.t.node(min_h - 1);

    // Best box: for every height threshold T, the largest rectangle of columns
    // reaching T; volume T * area.
    std::size_t best_volume = 0;
    std::vector<std::uint8_t> b(nx * ny);
    std::vector<std::size_t> thresholds(h.begin(), h.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    for (std::size_t T : thresholds) {
        if (T == 0) continue;
        for (std::size_t k = 0; k < b.size(); ++k) b[k] = h[k] >= T ? 1 : 0;
        Rect r = max_rectangle(b, nx, ny);
        if (r.area() == 0 || T * r.area() <= best_volume) continue;
        best_volume = T * r.area();
        RegionBox box;
        box.it_end = T;
        box.ix_lo = r.r_lo;
        box.ix_end = r.r_end;
        box.iy_lo = r.c_lo;
        box.iy_end = r.c_end;
        box.t_lo = g.t.node(0);
        box.t_hi = g.t.node(T - 1);
        box.x_lo = g.x.node(r.r_lo);
        box.x_hi = g.x.node(r.r_end - 1);
        if (g.y) {
            box.y_lo = g.y->node(r.c_lo);
            box.y_hi = g.y->node(r.c_end - 1);
        }
        v.region = box;
    }
    return v;
}

SsSolution solve_ss_levels(const SeikkalaSystem& sys, const GridSpec& grid, int level_count, const VimConfig& cfg) {
    grid.validate();
    cfg.validate();
    std::vector<double> alphas = uniform_alpha_grid(level_count);
    std::vector<std::future<SsLevel>> jobs;
    jobs.reserve(alphas.size());
    for (double a : alphas) {
        jobs.push_back(std::async(std::launch::async, [&sys, a, &grid, &cfg] { return solve_ss(sys, a, grid, cfg); }));
    }
    SsSolution sol;
    sol.grid = grid;
    sol.coupling = sys.coupling;
    // Collect every future before rethrowing so no job outlives its references.
    std::exception_ptr first_error;
    for (auto& j : jobs) {
        try {
            sol.levels.push_back(j.get());
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    sol.validity = validity_region(sol.levels);
    return sol;
}

SsSolution run_ss(const HeatLikeProblem& p, const GridOverrides& overrides, const VimConfig& cfg,
                  const SamplingConfig& sampling) {
    SeikkalaSystem sys = assemble_system(p, coefficient_profile(p, sampling));
    return solve_ss_levels(sys, make_grid(p, overrides), p.alpha_levels, cfg);
}

FuzzyOrRejection ss_fuzzy_solution(const SsSolution& sol, std::size_t it, std::size_t ix, std::size_t iy) {
    const GridSpec& g = sol.grid;
    if (it >= g.t.count || ix >= g.x.count || iy >= g.ny()) throw UsageError("node outside the grid");
    std::vector<AlphaLevel> levels;
    levels.reserve(sol.levels.size());
    for (const SsLevel& l : sol.levels) levels.push_back({l.alpha, Interval{l.u1.at(it, ix, iy), l.u2.at(it, ix, iy)}});
    return from_levels(std::move(levels));
}

std::pair<GridFunction, GridFunction> ss_oracle_values(const HeatLikeProblem& p, double alpha, const GridSpec& grid) {
    if (!p.oracle_ss) throw UsageError("problem '" + p.name + "' has no Seikkala oracle");
    ex::Environment env;
    for (const FuzzyParameter& fp : p.parameters) {
        Interval c = fp.cut(alpha);
        env.set(fp.name + "_lo", c.lo);
        env.set(fp.name + "_hi", c.hi);
    }
    return {sample(p.oracle_ss->u1, grid, env), sample(p.oracle_ss->u2, grid, env)};
}

}  // namespace fuzzyheat
