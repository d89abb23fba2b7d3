// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fuzzyheat/bfs.hpp"
#include "fuzzyheat/errors.hpp"
#include "fuzzyheat/fuzzy.hpp"
#include "fuzzyheat/ss.hpp"
#include "fuzzyheat/vim.hpp"
#include "support.hpp"

using namespace fuzzyheat;

namespace {

struct Result {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

GridSpec grid_with(const HeatLikeProblem& p, std::size_t n) {
    GridOverrides o;
    o.nt = o.nx = n;
    if (p.dimension == 2) o.ny = n;
    return make_grid(p, o);
}

double crisp_error(const HeatLikeProblem& p, const CrispInstance& inst, const GridSpec& g) {
    VimResult r = solve_crisp(inst, {}, g);
    if (!r.converged) return INFINITY;
    return sup_norm_diff(r.solution, sample(*p.oracle_G, g, inst.bindings));
}

/// Sum_{j<=n} (-a t)^j / j!
double partial_exp(int n, double a, double t) {
    double s = 0, term = 1;
    for (int j = 0; j <= n; ++j) {
        s += term;
        term *= -a * t / (j + 1);
    }
    return s;
}

// 1. Crisp VIM accuracy, refinement and runtime.
Result crisp_accuracy() {
    Result r;
    for (int i : {1, 3, 4, 5}) {
        HeatLikeProblem p = support::example(i);
        CrispInstance core = instantiate(p, Corner::peak, 1.0);
        auto t0 = std::chrono::steady_clock::now();
        double coarse = crisp_error(p, core, grid_with(p, 101));
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        double fine = crisp_error(p, core, grid_with(p, 201));
        double ratio = coarse / fine;
        r.detail << " ex" << i << ": err " << sci(coarse) << ", ratio " << std::round(ratio * 100) / 100 << ", "
                 << fixed3(secs) << " s;";
        r.require(coarse <= 5e-4, "ex" + std::to_string(i) + " error");
        r.require(ratio >= 3.0, "ex" + std::to_string(i) + " refinement");
        r.require(secs <= 10.0, "ex" + std::to_string(i) + " runtime");
    }
    return r;
}

// 2. Iterates against the partial-sum formulas.
Result iterate_regression() {
    Result r;
    double worst1 = 0, worst3 = 0;
    HeatLikeProblem p1 = support::example(1);
    for (double a : {0.0, 1.0}) {
        CrispInstance inst = instantiate(p1, Corner::lower, a);
        const double c = *inst.bindings.find("c"), g = *inst.bindings.find("g"), k = *inst.bindings.find("k");
        GridOverrides o;
        o.nt = 1001;
        o.nx = 101;
        GridSpec grid = make_grid(p1, o);
        std::vector<GridFunction> trace = iterate_trace(inst, 3, grid);
        for (int n = 1; n <= 3; ++n) {
            for (std::size_t it = 0; it < grid.t.count; ++it) {
                for (std::size_t ix = 0; ix < grid.x.count; ++ix) {
                    double t = grid.t.node(it), x = grid.x.node(ix);
                    double want = c * x * x * partial_exp(n, g, t) + k * t;
                    worst1 = std::max(worst1, std::abs(trace[n].at(it, ix) - want));
                }
            }
        }
    }
    HeatLikeProblem p3 = support::example(3);
    CrispInstance inst = instantiate(p3, Corner::peak, 1.0);
    const double k = *inst.bindings.find("k"), g = *inst.bindings.find("g"), b = *inst.bindings.find("b"),
                 c1 = *inst.bindings.find("c1"), c2 = *inst.bindings.find("c2");
    GridOverrides o;
    o.nt = 1001;
    o.nx = o.ny = 21;
    GridSpec grid = make_grid(p3, o);
    std::vector<GridFunction> trace = iterate_trace(inst, 3, grid);
    for (int n = 1; n <= 3; ++n) {
        for (std::size_t it = 0; it < grid.t.count; ++it) {
            for (std::size_t ix = 0; ix < grid.x.count; ++ix) {
                for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
                    double t = grid.t.node(it), x = grid.x.node(ix), y = grid.y->node(iy);
                    double want = c1 * y * y * partial_exp(n, b, t) - c2 * x * x * partial_exp(n, g, t) + k * x * y * t;
                    worst3 = std::max(worst3, std::abs(trace[n].at(it, ix, iy) - want));
                }
            }
        }
    }
    r.detail << " ex1 U1-U3 max dev " << sci(worst1) << "; ex3 U1-U3 max dev " << sci(worst3);
    r.require(worst1 <= 1e-6, "ex1");
    r.require(worst3 <= 1e-6, "ex3");
    return r;
}

// 3. Verdicts.
Result verdicts() {
    Result r;
    const Verdict want[] = {Verdict::BFS, Verdict::BFS, Verdict::SS_only, Verdict::SS_only};
    const int ids[] = {1, 3, 4, 5};
    for (int n = 0; n < 4; ++n) {
        HeatLikeProblem p = support::example(ids[n]);
        ClassificationReport rep = classify(p, *p.oracle_G);
        r.detail << " ex" << ids[n] << " " << to_string(rep.verdict) << ";";
        r.require(rep.verdict == want[n], "ex" + std::to_string(ids[n]) + " verdict");
        if (ids[n] == 4) r.require(rep.ss && !rep.ss->validity.empty(), "ex4 region nonempty");
        if (ids[n] == 5) {
            bool p_negative = std::find(rep.notes.begin(), rep.notes.end(), "P < 0") != rep.notes.end();
            r.require(p_negative, "ex5 P < 0 note");
            const ValidityRegion* v = rep.ss ? &rep.ss->validity : nullptr;
            bool bounded = v && v->t_band_end && *v->t_band_end < p.domain.t.hi;
            bool late_invalid = false;
            if (v) {
                for (std::size_t ix = 0; ix < v->grid.x.count; ++ix) late_invalid |= !v->valid(v->grid.t.count - 1, ix);
            }
            r.require(bounded && late_invalid, "ex5 bounded band");
            if (bounded) r.detail << " ex5 band t <= " << *v->t_band_end << ";";
        }
    }
    return r;
}

// 4. Monotone endpoints against brute-force box min/max.
Result endpoint_oracle() {
    Result r;
    auto rng = support::rng(400);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int examples = 0;
    for (int i = 1; i <= 5; ++i) {
        HeatLikeProblem p = support::example(i);
        std::optional<EndpointFunctions> ep;
        try {
            ep = endpoint_functions(p, *p.oracle_G, sign_profile(p, *p.oracle_G));
        } catch (const UsageError&) {
            r.detail << " ex" << i << " skipped (mixed sign profile);";
            continue;
        }
        ++examples;
        const int per_axis = p.dimension == 2 ? 5 : 11;
        double worst = 0;
        const int samples = 200;
        for (int n = 0; n < samples; ++n) {
            auto pick = [&](const AxisDomain& a) { return a.lo + (a.hi - a.lo) * unit(rng); };
            SpaceTimePoint q{pick(p.domain.t), pick(p.domain.x), p.domain.y ? pick(*p.domain.y) : 0.0};
            double a = unit(rng);
            Interval bf = brute_force_endpoints(p, *p.oracle_G, a, q, per_axis);
            worst = std::max({worst, std::abs(bf.lo - ep->z1.evaluate(a, q.t, q.x, q.y)),
                              std::abs(bf.hi - ep->z2.evaluate(a, q.t, q.x, q.y))});
        }
        r.detail << " ex" << i << ": " << samples << " samples, max dev " << sci(worst) << ";";
        r.require(worst <= 1e-8, "ex" + std::to_string(i));
    }
    r.require(examples >= 2, "at least the BFS examples checked");
    return r;
}

double ss_gap(const HeatLikeProblem& p, const SsSolution& s, double t_max) {
    double worst = 0;
    for (const SsLevel& lv : s.levels) {
        auto [o1, o2] = ss_oracle_values(p, lv.alpha, s.grid);
        for (std::size_t n = 0; n < o1.values().size(); ++n) {
            if (s.grid.t.node(n / s.grid.space_size()) > t_max + 1e-12) continue;
            worst = std::max({worst, std::abs(o1.values()[n] - lv.u1.values()[n]), std::abs(o2.values()[n] - lv.u2.values()[n])});
        }
    }
    return worst;
}

// 5. SS closed-form match.
Result ss_closed_forms() {
    Result r;
    HeatLikeProblem p2 = support::example(2);
    GridOverrides fine;
    fine.nt = 2501;
    double gap2 = ss_gap(p2, run_ss(p2, fine), p2.domain.t.hi);
    SsSolution s2 = run_ss(p2);
    double extent = s2.validity.region ? s2.validity.region->t_hi - s2.validity.region->t_lo : 0.0;
    double c3 = p2.find_parameter("c")->shape.u3;
    r.detail << " ex2: err " << sci(gap2) << " (nt=2501), t-extent " << extent << " vs 1/c3 = " << 1.0 / c3
             << " (spacing " << s2.grid.t.step() << ");";
    r.require(gap2 <= 5e-4, "ex2 endpoints");
    r.require(std::abs(extent - 1.0 / c3) <= s2.grid.t.step() + 1e-12, "ex2 t-extent");

    HeatLikeProblem p5 = support::example(5);
    fine.nt = 2001;
    SsSolution s5 = run_ss(p5, fine);
    double band = s5.validity.t_band_end.value_or(0.0);
    double gap5 = ss_gap(p5, s5, band);
    r.detail << " ex5: err " << sci(gap5) << " on t <= " << band << " (nt=2001)";
    r.require(s5.validity.t_band_end.has_value(), "ex5 band");
    r.require(gap5 <= 5e-4, "ex5 endpoints");
    return r;
}

// 6. On a BFS example the SS endpoints equal the BFS endpoint functions.
Result theorem2() {
    Result r;
    HeatLikeProblem p = support::example(1);
    GridOverrides o;
    o.nt = 2001;
    GridSpec g = make_grid(p, o);
    VimConfig cfg;
    EndpointFunctions ep = endpoint_functions(p, *p.oracle_G, sign_profile(p, *p.oracle_G));
    SsSolution s = solve_ss_levels(assemble_system(p, coefficient_profile(p)), g, p.alpha_levels, cfg);
    double gap = 0;
    for (const SsLevel& lv : s.levels) {
        gap = std::max({gap, sup_norm_diff(lv.u1, sample(ep.z1.at(lv.alpha), g)),
                        sup_norm_diff(lv.u2, sample(ep.z2.at(lv.alpha), g))});
    }
    double bound = 2 * cfg.tolerance;
    r.detail << " ex1: max gap " << sci(gap) << " over " << s.levels.size() << " levels (nt=2001), bound "
             << sci(bound) << " (2 x VIM tolerance)";
    r.require(gap <= bound, "gap");
    return r;
}

TriangularFuzzy random_triangle(std::mt19937_64& g, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    double v[3] = {u(g), u(g), u(g)};
    std::sort(v, v + 3);
    return {v[0], v[1], v[2]};
}

bool contains_all(const AlphaLevelFuzzyNumber& inner, const AlphaLevelFuzzyNumber& outer) {
    for (std::size_t l = 0; l < inner.size(); ++l) {
        if (!outer.cut(l).contains(inner.cut(l), 1e-12)) return false;
    }
    return true;
}

// 7. Fuzzy arithmetic properties.
Result fuzzy_properties() {
    Result r;
    auto g = support::rng(700);
    std::uniform_real_distribution<double> widen(0.0, 2.0), scalar(-3.0, 3.0);
    using Op = std::function<AlphaLevelFuzzyNumber(const AlphaLevelFuzzyNumber&, const AlphaLevelFuzzyNumber&)>;
    struct Named {
        const char* name;
        Op op;
        bool positive_rhs;
    };
    const std::vector<Named> ops = {
        {"add", [](const auto& a, const auto& b) { return a + b; }, false},
        {"sub", [](const auto& a, const auto& b) { return a - b; }, false},
        {"mul", [](const auto& a, const auto& b) { return a * b; }, false},
        {"div", [](const auto& a, const auto& b) { return a / b; }, true},
    };
    const int cases = 10000;
    std::size_t failures = 0;
    for (const Named& op : ops) {
        std::size_t fail_op = 0;
        for (int n = 0; n < cases; ++n) {
            TriangularFuzzy ta = random_triangle(g, -5, 5);
            TriangularFuzzy tb = op.positive_rhs ? random_triangle(g, 0.5, 5) : random_triangle(g, -5, 5);
            AlphaLevelFuzzyNumber a = make_triangular(ta), b = make_triangular(tb);
            AlphaLevelFuzzyNumber res = op.op(a, b);
            bool ok = validate_fuzzy(res.levels()).valid();

            AlphaLevelFuzzyNumber wa = make_triangular(ta.u1 - widen(g), ta.u2, ta.u3 + widen(g));
            AlphaLevelFuzzyNumber wb = op.positive_rhs ? make_triangular(std::max(0.25, tb.u1 - widen(g)), tb.u2, tb.u3 + widen(g))
                                                       : make_triangular(tb.u1 - widen(g), tb.u2, tb.u3 + widen(g));
            ok = ok && contains_all(res, op.op(wa, wb));

            double x = ta.u2, y = tb.u2;
            Interval crisp = op.op(make_crisp(x), make_crisp(y)).support();
            Interval direct = op.op(AlphaLevelFuzzyNumber({{0.0, {x, x}}, {1.0, {x, x}}}),
                                    AlphaLevelFuzzyNumber({{0.0, {y, y}}, {1.0, {y, y}}})).core();
            ok = ok && crisp.lo == crisp.hi && crisp == direct;

            if (op.name == std::string("mul") || op.name == std::string("div")) {
                for (std::size_t l = 0; l < a.size() && ok; ++l) {
                    Interval ca = a.cut(l), cb = b.cut(l);
                    double lo = INFINITY, hi = -INFINITY;
                    for (int s = 0; s <= 10; ++s) {
                        for (int t = 0; t <= 10; ++t) {
                            double u = ca.lo + ca.width() * s / 10, v = cb.lo + cb.width() * t / 10;
                            double w = op.name == std::string("mul") ? u * v : u / v;
                            lo = std::min(lo, w);
                            hi = std::max(hi, w);
                        }
                    }
                    double tol = 1e-12 * (1 + std::max(std::abs(lo), std::abs(hi)));
                    ok = std::abs(res.cut(l).lo - lo) <= tol && std::abs(res.cut(l).hi - hi) <= tol;
                }
            }
            if (!ok) ++fail_op;
        }
        r.detail << " " << op.name << " " << cases - static_cast<int>(fail_op) << "/" << cases << ";";
        failures += fail_op;
    }
    std::size_t fail_scale = 0;
    for (int n = 0; n < cases; ++n) {
        AlphaLevelFuzzyNumber a = make_triangular(random_triangle(g, -5, 5));
        double k = scalar(g);
        AlphaLevelFuzzyNumber s = scale(a, k);
        bool ok = validate_fuzzy(s.levels()).valid();
        for (std::size_t l = 0; l < a.size() && ok; ++l) {
            double lo = std::min(k * a.cut(l).lo, k * a.cut(l).hi), hi = std::max(k * a.cut(l).lo, k * a.cut(l).hi);
            ok = s.cut(l) == Interval{lo, hi};
        }
        if (!ok) ++fail_scale;
    }
    r.detail << " scale " << cases - static_cast<int>(fail_scale) << "/" << cases;
    failures += fail_scale;
    r.require(failures == 0, "property failures");
    return r;
}

// 8. Differentiability conditions and the decreasing-k1 mutant.
Result differentiability() {
    Result r;
    HeatLikeProblem p = support::example(1);
    EndpointFunctions ep = endpoint_functions(p, *p.oracle_G, sign_profile(p, *p.oracle_G));
    GammaSamples gs = gamma_samples(ep, p);
    const TriangularFuzzy k = p.find_parameter("k")->shape;
    double dev = 0;
    for (std::size_t a = 0; a < gs.alphas.size(); ++a) {
        Interval cut = k.cut(gs.alphas[a]);
        for (std::size_t n = 0; n < gs.points.size(); ++n) {
            std::size_t idx = a * gs.points.size() + n;
            dev = std::max({dev, std::abs(gs.gamma[0][idx] - cut.lo), std::abs(gs.gamma[1][idx] - cut.hi)});
        }
    }
    DifferentiabilityReport rep = differentiability_check(ep, p);
    r.detail << " Gamma vs (k1, k2) max dev " << sci(dev) << "; (i)-(iii) " << (rep.all_pass() ? "pass" : "fail") << ";";
    r.require(dev <= 1e-12, "Gamma reduces to k endpoints");
    r.require(rep.all_pass(), "conditions on ex1");

    EndpointFunctions mutant = ep;
    for (EndpointRule& rule : mutant.z1.binding) {
        if (rule.name == "k") rule.value = [k](double a) { return k.u3 - (k.u3 - k.u2) * a; };
    }
    DifferentiabilityReport bad = differentiability_check(mutant, p);
    bool located = bad.lower_nondecreasing.worst.has_value();
    r.require(!bad.lower_nondecreasing.pass && located, "mutant fails (i) with a witness");
    if (located) {
        const Violation& w = *bad.lower_nondecreasing.worst;
        r.detail << " mutant fails (i) at t=" << w.point.t << " x=" << w.point.x << " alpha=" << w.alpha << " by "
                 << sci(w.amount);
    }
    return r;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Result (*run)();
    };
    const Criterion criteria[] = {
        {1, "crisp VIM accuracy", crisp_accuracy},
        {2, "iterate regression", iterate_regression},
        {3, "classification verdicts", verdicts},
        {4, "endpoint oracle equivalence", endpoint_oracle},
        {5, "SS closed-form match", ss_closed_forms},
        {6, "BFS and SS endpoints coincide", theorem2},
        {7, "fuzzy arithmetic properties", fuzzy_properties},
        {8, "differentiability conditions", differentiability},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Result r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail << " exception: " << e.what();
        }
        if (!r.pass) ++failed;
        std::cout << (r.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "):" << r.detail.str()
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
