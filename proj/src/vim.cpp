#include "fuzzyheat/vim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "fuzzyheat/errors.hpp"

namespace fuzzyheat {

namespace ex = fuzzyheat::expr;

namespace {

const std::array<std::string, 3> kSlots{"t", "x", "y"};

std::string node_label(const GridSpec& g, std::size_t it, std::size_t ix, std::size_t iy) {
    std::ostringstream os;
    os.precision(6);
    os << "t=" << g.t.node(it) << " x=" << g.x.node(ix);
    if (g.y) os << " y=" << g.y->node(iy);
    return os.str();
}

ex::Expression second(const ex::Expression& e, const char* var) {
    return ex::differentiate(ex::differentiate(e, var), var);
}

/// L_i applied to the vector of component expressions.
ex::Expression apply_operator(const VimEquation& eq, const std::vector<ex::Expression>& u) {
    ex::Expression r = eq.Pxx * second(u[eq.xx_source], "x");
    if (eq.Qyy) r = r + *eq.Qyy * second(u[eq.yy_source], "y");
    return ex::simplify(r);
}

class TimeWeights {
public:
    explicit TimeWeights(const Axis& t) : h_(t.step()) { tau_.emplace_back(t.count, 1.0); }

    /// Repeated trapezoid integral of 1, m times.
    const std::vector<double>& operator()(std::size_t m) {
        while (tau_.size() <= m) tau_.push_back(cumulative_trapezoid(tau_.back(), h_));
        return tau_[m];
    }

private:
    double h_;
    std::vector<std::vector<double>> tau_;
};

/// Grid values of I^m[e].
GridFunction integrated_term(const ex::Expression& e, std::size_t m, const GridSpec& g, TimeWeights& tau) {
    if (e.is_constant(0.0)) return GridFunction(g);
    if (ex::depends_on(e, "t")) {
        GridFunction f = sample(e, g);
        for (std::size_t k = 0; k < m; ++k) f = cumulative_time_integral(f);
        return f;
    }
    Axis single{0.0, 1.0, 3};
    GridSpec flat = g;
    flat.t = single;
    GridFunction space = sample(e, flat);
    const std::vector<double>& w = tau(m);
    const std::size_t ms = g.space_size();
    GridFunction out(g);
    auto& v = out.values();
    for (std::size_t it = 0; it < g.t.count; ++it) {
        for (std::size_t j = 0; j < ms; ++j) v[it * ms + j] = w[it] * space.values()[j];
    }
    return out;
}

double sup_or_inf(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values()) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(v));
    }
    return m;
}

struct RunOptions {
    int steps = 0;
    bool stop_on_tolerance = true;
    std::vector<std::vector<GridFunction>>* trace = nullptr;
};

VimSystemResult run(const VimSystem& sys, const GridSpec& grid, const VimConfig& cfg, const RunOptions& opt) {
    cfg.validate();
    grid.validate();
    const std::size_t n = sys.equations.size();
    if (n == 0) throw UsageError("VIM system has no equations");
    for (const VimEquation& eq : sys.equations) {
        if (eq.xx_source >= n || (eq.Qyy && eq.yy_source >= n)) throw UsageError("equation source index out of range");
        if (eq.Qyy && !grid.y) throw UsageError("equation has a y term but the grid is 1D");
    }

    TimeWeights tau(grid.t);
    VimSystemResult res;
    std::vector<ex::Expression> u0;
    for (const VimEquation& eq : sys.equations) {
        if (ex::depends_on(eq.initial, "t")) throw ValidationError("initial condition depends on t");
        u0.push_back(ex::simplify(eq.initial));
        res.solutions.push_back(sample(eq.initial, grid));
    }
    if (opt.trace) opt.trace->push_back(res.solutions);

    std::vector<ex::Expression> delta(n);
    for (std::size_t i = 0; i < n; ++i) delta[i] = ex::simplify(sys.equations[i].F - apply_operator(sys.equations[i], u0));

    for (int k = 1; k <= opt.steps; ++k) {
        for (const ex::Expression& d : delta) {
            if (d.size() > cfg.expression_cap) {
                throw NumericalError("VIM increment " + std::to_string(k) + " grew to " + std::to_string(d.size()) +
                                     " expression nodes (cap " + std::to_string(cfg.expression_cap) + ")");
            }
        }
        double step = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            GridFunction d = integrated_term(delta[i], static_cast<std::size_t>(k), grid, tau);
            step = std::max(step, sup_or_inf(d));
            res.solutions[i] += d;
        }
        res.increments.push_back(delta);
        res.delta_history.push_back(step);
        res.iterations_used = k;
        res.final_delta = step;
        if (opt.trace) opt.trace->push_back(res.solutions);

        if (!std::isfinite(step) || step > cfg.divergence_guard) {
            res.diverged = true;
            std::ostringstream os;
            os << "iteration " << k << ": successive-iterate sup-norm " << step << " exceeds the divergence guard "
               << cfg.divergence_guard;
            res.diagnostic = os.str();
            return res;
        }
        if (opt.stop_on_tolerance && step <= cfg.tolerance) {
            res.converged = true;
            return res;
        }
        std::vector<ex::Expression> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = ex::simplify(-apply_operator(sys.equations[i], delta));
        delta = std::move(next);
    }
    if (opt.stop_on_tolerance) {
        std::ostringstream os;
        os << "no convergence after " << opt.steps << " iterations (last sup-norm change " << res.final_delta << ")";
        res.diagnostic = os.str();
    }
    res.converged = res.final_delta <= cfg.tolerance;
    return res;
}

}  // namespace

void VimConfig::validate() const {
    if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
    if (!(divergence_guard > 0.0)) throw DomainError("divergence_guard must be positive");
}

GridFunction sample(const ex::Expression& e, const GridSpec& g, const ex::Environment& bindings) {
    ex::Expression bound = bindings.values().empty() ? e : ex::substitute(e, bindings);
    ex::CompiledExpression f(bound, kSlots);
    GridFunction out(g);
    auto& v = out.values();
    std::array<double, 3> point{};
    const bool timeless = !ex::depends_on(bound, "t");
    const std::size_t ms = g.space_size();
    for (std::size_t it = 0; it < g.t.count; ++it) {
        point[0] = g.t.node(it);
        if (timeless && it > 0) {
            std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(ms), v.begin() + static_cast<std::ptrdiff_t>(it * ms));
            continue;
        }
        for (std::size_t ix = 0; ix < g.x.count; ++ix) {
            point[1] = g.x.node(ix);
            for (std::size_t iy = 0; iy < g.ny(); ++iy) {
                point[2] = g.y ? g.y->node(iy) : 0.0;
                try {
                    v[g.index(it, ix, iy)] = f(point);
                } catch (const EvaluationError& err) {
                    throw EvaluationError(std::string(err.what()) + " at " + node_label(g, it, ix, iy),
                                          err.subexpression());
                }
            }
        }
    }
    return out;
}

VimSystem crisp_system(const CrispInstance& inst) {
    if (!inst.problem) throw UsageError("crisp instance has no problem");
    const HeatLikeProblem& p = *inst.problem;
    VimEquation eq;
    eq.initial = ex::substitute(p.initial, inst.bindings);
    eq.F = ex::substitute(p.F, inst.bindings);
    eq.Pxx = ex::substitute(p.xx_coefficient(), inst.bindings);
    if (const ex::Expression* q = p.yy_coefficient()) eq.Qyy = ex::substitute(*q, inst.bindings);
    return VimSystem{{eq}};
}

VimSystemResult solve_system(const VimSystem& sys, const GridSpec& grid, const VimConfig& cfg) {
    VimSystemResult res = run(sys, grid, cfg, {cfg.max_iterations, true, nullptr});
    res.residual_sup = res.diverged ? std::numeric_limits<double>::infinity() : system_residual(sys, res);
    return res;
}

std::vector<std::vector<GridFunction>> system_trace(const VimSystem& sys, const GridSpec& grid, int n,
                                                    const VimConfig& cfg) {
    if (n < 0) throw DomainError("iterate count must be non-negative");
    std::vector<std::vector<GridFunction>> trace;
    VimConfig unbounded = cfg;
    unbounded.divergence_guard = std::numeric_limits<double>::max();
    run(sys, grid, unbounded, {n, false, &trace});
    return trace;
}

double system_residual(const VimSystem& sys, const VimSystemResult& res) {
    const std::size_t n = sys.equations.size();
    const GridSpec& g = res.solutions.front().spec();
    TimeWeights tau(g.t);
    std::vector<ex::Expression> level(n);
    for (std::size_t i = 0; i < n; ++i) level[i] = sys.equations[i].initial;

    std::vector<GridFunction> r;
    for (std::size_t i = 0; i < n; ++i) {
        GridFunction ri = time_derivative(res.solutions[i]);
        ri -= sample(sys.equations[i].F, g);
        ri += integrated_term(apply_operator(sys.equations[i], level), 0, g, tau);
        r.push_back(std::move(ri));
    }
    for (std::size_t m = 0; m < res.increments.size(); ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            r[i] += integrated_term(apply_operator(sys.equations[i], res.increments[m]), m + 1, g, tau);
        }
    }

    double worst = 0.0;
    const std::size_t y_lo = g.y ? 1 : 0;
    const std::size_t y_hi = g.y ? g.ny() - 1 : 1;
    for (const GridFunction& ri : r) {
        for (std::size_t it = 1; it + 1 < g.t.count; ++it) {
            for (std::size_t ix = 1; ix + 1 < g.x.count; ++ix) {
                for (std::size_t iy = y_lo; iy < y_hi; ++iy) worst = std::max(worst, std::abs(ri.at(it, ix, iy)));
            }
        }
    }
    return worst;
}

VimResult solve_crisp(const CrispInstance& inst, const VimConfig& cfg, const std::optional<GridSpec>& grid) {
    GridSpec g = grid ? *grid : make_grid(*inst.problem);
    VimSystemResult s = solve_system(crisp_system(inst), g, cfg);
    VimResult r;
    r.solution = std::move(s.solutions.front());
    r.iterations_used = s.iterations_used;
    r.final_delta = s.final_delta;
    r.residual_sup = s.residual_sup;
    r.converged = s.converged;
    r.diverged = s.diverged;
    r.diagnostic = std::move(s.diagnostic);
    r.delta_history = std::move(s.delta_history);
    return r;
}

std::vector<GridFunction> iterate_trace(const CrispInstance& inst, int n, const std::optional<GridSpec>& grid) {
    GridSpec g = grid ? *grid : make_grid(*inst.problem);
    std::vector<GridFunction> out;
    for (auto& level : system_trace(crisp_system(inst), g, n)) out.push_back(std::move(level.front()));
    return out;
}

GridFunction correction_step(const GridFunction& Un, const CrispInstance& inst) {
    const GridSpec& g = Un.spec();
    const HeatLikeProblem& p = *inst.problem;
    if (p.dimension == 2 && !g.y) throw UsageError("2D problem on a 1D grid");
    GridFunction integrand = time_derivative(Un);
    GridFunction pxx = sample(p.xx_coefficient(), g, inst.bindings);
    GridFunction uxx = second_derivative(Un, SpaceAxis::x);
    for (std::size_t i = 0; i < integrand.values().size(); ++i) integrand.values()[i] += pxx.values()[i] * uxx.values()[i];
    if (const ex::Expression* q = p.yy_coefficient()) {
        GridFunction qyy = sample(*q, g, inst.bindings);
        GridFunction uyy = second_derivative(Un, SpaceAxis::y);
        for (std::size_t i = 0; i < integrand.values().size(); ++i) {
            integrand.values()[i] += qyy.values()[i] * uyy.values()[i];
        }
    }
    integrand -= sample(p.F, g, inst.bindings);
    GridFunction next = Un - cumulative_time_integral(integrand);
    next.require_finite();
    return next;
}

}  // namespace fuzzyheat
