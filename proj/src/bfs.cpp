#include "fuzzyheat/bfs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fuzzyheat/errors.hpp"
#include "fuzzyheat/ss.hpp"

namespace fuzzyheat {

namespace ex = fuzzyheat::expr;

namespace {

/// Compiled expression whose parameter slots follow an endpoint binding.
class BoundEvaluator {
public:
    BoundEvaluator(const ex::Expression& e, const EndpointBinding& binding) : binding_(&binding) {
        std::vector<std::string> slots{"t", "x", "y"};
        for (const EndpointRule& r : binding) slots.push_back(r.name);
        f_ = ex::CompiledExpression(ex::simplify(e), slots);
        values_.assign(slots.size(), 0.0);
    }

    void set_alpha(double alpha) {
        for (std::size_t i = 0; i < binding_->size(); ++i) values_[3 + i] = (*binding_)[i].value(alpha);
    }

    double operator()(double t, double x, double y) {
        values_[0] = t;
        values_[1] = x;
        values_[2] = y;
        return f_(values_);
    }

private:
    const EndpointBinding* binding_;
    ex::CompiledExpression f_;
    std::vector<double> values_;
};

std::string describe(const SpaceTimePoint& p, int dimension) {
    std::ostringstream os;
    os.precision(6);
    os << "t=" << p.t << " x=" << p.x;
    if (dimension == 2) os << " y=" << p.y;
    return os.str();
}

std::string describe(const SpaceTimeBox& b, int dimension) {
    std::ostringstream os;
    os.precision(4);
    os << "t in [" << b.t_lo << ", " << b.t_hi << "], x in [" << b.x_lo << ", " << b.x_hi << "]";
    if (dimension == 2) os << ", y in [" << b.y_lo << ", " << b.y_hi << "]";
    return os.str();
}

std::vector<SpaceTimePoint> lattice(const HeatLikeProblem& p, int n, bool with_time) {
    std::vector<double> ts = with_time ? axis_samples(p.domain.t, n) : std::vector<double>{0.0};
    std::vector<double> xs = axis_samples(p.domain.x, n);
    std::vector<double> ys = p.domain.y ? axis_samples(*p.domain.y, n) : std::vector<double>{0.0};
    std::vector<SpaceTimePoint> out;
    out.reserve(ts.size() * xs.size() * ys.size());
    for (double t : ts) {
        for (double x : xs) {
            for (double y : ys) out.push_back({t, x, y});
        }
    }
    return out;
}

const std::map<std::string, SignEntry>& partials_of(const SignProfile& prof, const std::string& name) {
    static const std::map<std::string, SignEntry> none;
    auto it = prof.partials.find(name);
    return it == prof.partials.end() ? none : it->second;
}

}  // namespace

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::BFS: return "BFS";
        case Verdict::SS_only: return "SS_only";
        case Verdict::none: return "none";
    }
    return "?";
}

ex::Environment BoundEndpoint::environment(double alpha) const {
    ex::Environment env;
    for (const EndpointRule& r : binding) env.set(r.name, r.value(alpha));
    return env;
}

ex::Expression BoundEndpoint::at(double alpha) const { return ex::substitute(expression, environment(alpha)); }

double BoundEndpoint::evaluate(double alpha, double t, double x, double y) const {
    ex::Environment env = environment(alpha);
    env.set("t", t);
    env.set("x", x);
    env.set("y", y);
    return ex::evaluate(expression, env);
}

BoundEndpoint monotone_endpoint(const HeatLikeProblem& p, const ex::Expression& e,
                                const std::map<std::string, SignEntry>& partials, Endpoint which) {
    BoundEndpoint out{e, {}};
    for (const FuzzyParameter& fp : p.parameters) {
        if (!ex::depends_on(e, fp.name)) continue;
        auto it = partials.find(fp.name);
        if (it == partials.end()) throw UsageError("no sign information for parameter '" + fp.name + "'");
        Monotone dir = monotone_from(it->second);
        if (dir == Monotone::mixed) {
            throw UsageError(it->second.label + " changes sign on the domain; endpoints are not attained at cut "
                             "ends, use brute_force_endpoints");
        }
        bool take_lo = (dir == Monotone::increasing) == (which == Endpoint::lower);
        FuzzyParameter param = fp;
        out.binding.push_back({fp.name, [param, take_lo](double a) {
                                   Interval c = param.cut(a);
                                   return take_lo ? c.lo : c.hi;
                               }});
    }
    return out;
}

EndpointFunctions endpoint_functions(const HeatLikeProblem& p, const ex::Expression& G, const SignProfile& prof) {
    auto pair = [&](const ex::Expression& e, const std::string& name) {
        const auto& parts = partials_of(prof, name);
        return std::pair{monotone_endpoint(p, e, parts, Endpoint::lower), monotone_endpoint(p, e, parts, Endpoint::upper)};
    };
    EndpointFunctions ep;
    std::tie(ep.z1, ep.z2) = pair(G, "G");
    std::tie(ep.F1, ep.F2) = pair(p.F, "F");
    std::tie(ep.P1, ep.P2) = pair(p.P, "P");
    if (p.Q) {
        auto [q1, q2] = pair(*p.Q, "Q");
        ep.Q1 = std::move(q1);
        ep.Q2 = std::move(q2);
    }
    std::tie(ep.initial1, ep.initial2) = pair(p.initial, "initial");
    return ep;
}

Interval brute_force_endpoints(const HeatLikeProblem& p, const ex::Expression& G, double alpha,
                               const SpaceTimePoint& point, int samples_per_axis) {
    if (samples_per_axis < 3) throw DomainError("brute force needs at least 3 samples per axis");
    std::vector<std::string> slots{"t", "x", "y"};
    std::vector<std::vector<double>> values{{point.t}, {point.x}, {point.y}};
    for (const FuzzyParameter& fp : p.parameters) {
        slots.push_back(fp.name);
        Interval c = fp.cut(alpha);
        if (!ex::depends_on(G, fp.name) || c.is_point()) {
            values.push_back({ex::depends_on(G, fp.name) ? c.lo : fp.shape.u2});
            continue;
        }
        std::vector<double> v(static_cast<std::size_t>(samples_per_axis));
        for (int i = 0; i < samples_per_axis; ++i) v[i] = c.lo + (c.hi - c.lo) * i / (samples_per_axis - 1);
        v.back() = c.hi;
        values.push_back(std::move(v));
    }
    ex::CompiledExpression f(G, slots);
    const std::size_t dims = slots.size();
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> pt(dims);
    Interval r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (;;) {
        for (std::size_t d = 0; d < dims; ++d) pt[d] = values[d][idx[d]];
        double v = f(pt);
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
        std::size_t d = 0;
        while (d < dims && ++idx[d] == values[d].size()) idx[d++] = 0;
        if (d == dims) break;
    }
    return r;
}

GammaSamples gamma_samples(const EndpointFunctions& ep, const HeatLikeProblem& p, const BfsSampling& cfg) {
    GammaSamples s;
    s.alphas = uniform_alpha_grid(p.alpha_levels);
    s.points = lattice(p, cfg.signs.nodes_per_axis, true);
    const bool eq3 = p.dimension == 2 && p.orientation == Orientation::eq3;
    const BoundEndpoint* z[2] = {&ep.z1, &ep.z2};
    const BoundEndpoint* f[2] = {&ep.F1, &ep.F2};
    const BoundEndpoint* pc[2] = {&ep.P1, &ep.P2};
    const BoundEndpoint* qc[2] = {ep.Q1 ? &*ep.Q1 : nullptr, ep.Q2 ? &*ep.Q2 : nullptr};

    for (int i = 0; i < 2; ++i) {
        const BoundEndpoint* xx = eq3 ? qc[i] : pc[i];
        const BoundEndpoint* yy = p.dimension == 2 ? (eq3 ? pc[i] : qc[i]) : nullptr;
        BoundEvaluator zt(ex::differentiate(z[i]->expression, "t"), z[i]->binding);
        BoundEvaluator zxx(ex::differentiate(ex::differentiate(z[i]->expression, "x"), "x"), z[i]->binding);
        BoundEvaluator cxx(xx->expression, xx->binding);
        std::optional<BoundEvaluator> zyy, cyy;
        if (yy) {
            zyy.emplace(ex::differentiate(ex::differentiate(z[i]->expression, "y"), "y"), z[i]->binding);
            cyy.emplace(yy->expression, yy->binding);
        }
        BoundEvaluator src(f[i]->expression, f[i]->binding);
        s.gamma[i].reserve(s.alphas.size() * s.points.size());
        s.source[i].reserve(s.alphas.size() * s.points.size());
        for (double a : s.alphas) {
            zt.set_alpha(a);
            zxx.set_alpha(a);
            cxx.set_alpha(a);
            src.set_alpha(a);
            if (yy) {
                zyy->set_alpha(a);
                cyy->set_alpha(a);
            }
            for (const SpaceTimePoint& q : s.points) {
                double g = zt(q.t, q.x, q.y) + cxx(q.t, q.x, q.y) * zxx(q.t, q.x, q.y);
                if (yy) g += (*cyy)(q.t, q.x, q.y) * (*zyy)(q.t, q.x, q.y);
                s.gamma[i].push_back(g);
                s.source[i].push_back(src(q.t, q.x, q.y));
            }
        }
    }
    return s;
}

DifferentiabilityReport differentiability_check(const EndpointFunctions& ep, const HeatLikeProblem& p,
                                                const BfsSampling& cfg) {
    GammaSamples s = gamma_samples(ep, p, cfg);
    DifferentiabilityReport rep;
    rep.lower_nondecreasing.name = "(i) lower Gamma endpoint nondecreasing in alpha";
    rep.upper_nonincreasing.name = "(ii) upper Gamma endpoint nonincreasing in alpha";
    rep.core_ordered.name = "(iii) lower <= upper at alpha = 1";
    const std::size_t np = s.points.size();
    const std::size_t na = s.alphas.size();

    auto note = [](ConditionReport& c, const SpaceTimePoint& q, double alpha, double amount) {
        c.pass = false;
        if (!c.worst || amount > c.worst->amount) c.worst = Violation{q, alpha, amount};
    };
    for (std::size_t a = 0; a + 1 < na; ++a) {
        for (std::size_t k = 0; k < np; ++k) {
            double g0 = s.gamma[0][a * np + k], g1 = s.gamma[0][(a + 1) * np + k];
            double tol = cfg.slack * (1.0 + std::max(std::abs(g0), std::abs(g1)));
            ++rep.lower_nondecreasing.checked;
            if (g1 - g0 < -tol) note(rep.lower_nondecreasing, s.points[k], s.alphas[a + 1], g0 - g1);
            double h0 = s.gamma[1][a * np + k], h1 = s.gamma[1][(a + 1) * np + k];
            tol = cfg.slack * (1.0 + std::max(std::abs(h0), std::abs(h1)));
            ++rep.upper_nonincreasing.checked;
            if (h1 - h0 > tol) note(rep.upper_nonincreasing, s.points[k], s.alphas[a + 1], h1 - h0);
        }
    }
    for (std::size_t k = 0; k < np; ++k) {
        double lo = s.gamma[0][(na - 1) * np + k], hi = s.gamma[1][(na - 1) * np + k];
        double tol = cfg.slack * (1.0 + std::max(std::abs(lo), std::abs(hi)));
        ++rep.core_ordered.checked;
        if (lo - hi > tol) note(rep.core_ordered, s.points[k], 1.0, lo - hi);
    }
    return rep;
}

double bfs_residual(const EndpointFunctions& ep, const HeatLikeProblem& p, const BfsSampling& cfg) {
    GammaSamples s = gamma_samples(ep, p, cfg);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (std::size_t k = 0; k < s.gamma[i].size(); ++k) {
            worst = std::max(worst, std::abs(s.gamma[i][k] - s.source[i][k]));
        }
    }
    return worst;
}

double initial_mismatch(const EndpointFunctions& ep, const HeatLikeProblem& p, const BfsSampling& cfg) {
    std::vector<SpaceTimePoint> pts = lattice(p, cfg.signs.nodes_per_axis, false);
    BoundEvaluator z[2] = {{ep.z1.expression, ep.z1.binding}, {ep.z2.expression, ep.z2.binding}};
    BoundEvaluator ic[2] = {{ep.initial1.expression, ep.initial1.binding},
                            {ep.initial2.expression, ep.initial2.binding}};
    double worst = 0.0;
    for (double a : uniform_alpha_grid(p.alpha_levels)) {
        for (int i = 0; i < 2; ++i) {
            z[i].set_alpha(a);
            ic[i].set_alpha(a);
            for (const SpaceTimePoint& q : pts) worst = std::max(worst, std::abs(z[i](0.0, q.x, q.y) - ic[i](0.0, q.x, q.y)));
        }
    }
    return worst;
}

ClassificationReport classify(const HeatLikeProblem& p, const ex::Expression& G, const ClassifyOptions& opt) {
    ClassificationReport rep;
    rep.sign_profile = sign_profile(p, G, opt.sampling.signs);
    const SignProfile& prof = rep.sign_profile;
    bool bfs = true;

    auto coefficient_note = [&](const SignEntry& e, const char* name) {
        if (e.sign == Sign::positive) return;
        bfs = false;
        if (e.sign == Sign::negative) {
            rep.notes.push_back(std::string(name) + " < 0");
        } else {
            rep.notes.push_back(std::string(name) + " is not strictly positive (sign " + to_string(e.sign) + ")");
        }
    };
    coefficient_note(prof.P, "P");
    if (prof.Q) coefficient_note(*prof.Q, "Q");

    for (const SignEntry& e : prof.products) {
        if (e.sign == Sign::positive) continue;
        bfs = false;
        std::string n = e.label + " is " + to_string(e.sign);
        if (e.sign == Sign::mixed && e.positive_region) n += "; positive samples lie in " + describe(*e.positive_region, p.dimension);
        rep.notes.push_back(n);
    }

    try {
        EndpointFunctions ep = endpoint_functions(p, G, prof);
        rep.differentiability = differentiability_check(ep, p, opt.sampling);
        for (const ConditionReport* c : {&rep.differentiability->lower_nondecreasing,
                                         &rep.differentiability->upper_nonincreasing,
                                         &rep.differentiability->core_ordered}) {
            if (c->pass) continue;
            bfs = false;
            std::ostringstream os;
            os << c->name << " fails, worst at " << describe(c->worst->point, p.dimension) << " alpha=" << c->worst->alpha
               << " by " << c->worst->amount;
            rep.notes.push_back(os.str());
        }
        rep.residual_sup = bfs_residual(ep, p, opt.sampling);
        if (*rep.residual_sup > opt.residual_tolerance) {
            bfs = false;
            std::ostringstream os;
            os << "endpoint residual " << *rep.residual_sup << " exceeds " << opt.residual_tolerance;
            rep.notes.push_back(os.str());
        }
        rep.initial_mismatch = initial_mismatch(ep, p, opt.sampling);
        if (*rep.initial_mismatch > opt.residual_tolerance) {
            bfs = false;
            std::ostringstream os;
            os << "endpoints miss the initial condition by " << *rep.initial_mismatch;
            rep.notes.push_back(os.str());
        }
    } catch (const UsageError& e) {
        bfs = false;
        rep.notes.push_back(std::string("endpoint functions unavailable: ") + e.what());
    }

    if (opt.validate_oracle) {
        CrispInstance core = instantiate(p, Corner::peak, 1.0);
        GridSpec g = make_grid(p, opt.grid);
        VimResult v = solve_crisp(core, opt.vim, g);
        if (v.converged) {
            rep.oracle_vim_error = sup_norm_diff(v.solution, sample(G, g, core.bindings));
            std::ostringstream os;
            os << "closed form differs from the crisp VIM solution by " << *rep.oracle_vim_error << " (sup-norm)";
            rep.notes.push_back(os.str());
        } else {
            rep.notes.push_back("crisp VIM did not converge; closed form not cross-checked: " + v.diagnostic);
        }
    }

    if (bfs) {
        rep.verdict = Verdict::BFS;
        return rep;
    }
    try {
        rep.ss = std::make_shared<SsSolution>(run_ss(p, opt.grid, opt.vim, opt.sampling.signs));
        const ValidityRegion& v = rep.ss->validity;
        if (v.empty()) {
            rep.verdict = Verdict::none;
            rep.notes.push_back("no Seikkala solution: the endpoint pair is not a fuzzy number near t = 0");
        } else {
            rep.verdict = Verdict::SS_only;
            std::ostringstream os;
            os.precision(6);
            const RegionBox& b = *v.region;
            os << "Seikkala solution valid on t in [" << b.t_lo << ", " << b.t_hi << "], x in [" << b.x_lo << ", "
               << b.x_hi << "]";
            if (p.dimension == 2) os << ", y in [" << b.y_lo << ", " << b.y_hi << "]";
            rep.notes.push_back(os.str());
        }
    } catch (const Error& e) {
        rep.verdict = Verdict::none;
        rep.notes.push_back(std::string("Seikkala system not solvable: ") + e.what());
    }
    return rep;
}

}  // namespace fuzzyheat
