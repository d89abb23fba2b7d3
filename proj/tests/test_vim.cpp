#include <doctest.h>

#include <cmath>

#include "fuzzyheat/errors.hpp"
#include "fuzzyheat/vim.hpp"
#include "support.hpp"

using namespace fuzzyheat;

namespace {

const char* kPositiveC =
    R"({"params":[{"name":"k","triangle":[0.5,1,1.5]},{"name":"g","triangle":[0.5,1,1.5]},)"
    R"({"name":"c","triangle":[1.5,2,2.5]}]})";

GridSpec with_nt(const HeatLikeProblem& p, std::size_t nt, std::size_t nx = 0) {
    GridOverrides o;
    o.nt = nt;
    if (nx) o.nx = nx;
    return make_grid(p, o);
}

/// Example 1 iterates: c x^2 sum_{j<=n} (-g t)^j / j!, plus k t once n >= 1.
double ex1_iterate(int n, double c, double g, double k, double t, double x) {
    double s = 0, term = 1;
    for (int j = 0; j <= n; ++j) {
        s += term;
        term *= -g * t / (j + 1);
    }
    return c * x * x * s + (n >= 1 ? k * t : 0.0);
}

double oracle_error(const HeatLikeProblem& p, const CrispInstance& inst, const VimResult& r) {
    return sup_norm_diff(r.solution, sample(*p.oracle_G, r.solution.spec(), inst.bindings));
}

}  // namespace

TEST_SUITE("vim") {

TEST_CASE("config validation") {
    VimConfig c;
    CHECK_NOTHROW(c.validate());
    c.max_iterations = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.tolerance = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.divergence_guard = -1;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("one correction step from the initial condition") {
    HeatLikeProblem p = support::variant(1, kPositiveC);
    CrispInstance inst = instantiate(p, Corner::peak, 1.0);
    GridSpec g = with_nt(p, 1001);
    GridFunction u0 = sample(p.initial, g, inst.bindings);
    GridFunction u1 = correction_step(u0, inst);
    std::size_t it = 500, ix = g.x.count - 1;
    REQUIRE(g.t.node(it) == doctest::Approx(0.5));
    REQUIRE(g.x.node(ix) == doctest::Approx(1.0));
    CHECK(u1.at(it, ix) == doctest::Approx(1.5).epsilon(1e-9));

    // The exact solution is a fixed point up to discretisation error.
    GridFunction exact = sample(*p.oracle_G, g, inst.bindings);
    CHECK(sup_norm_diff(correction_step(exact, inst), exact) < 1e-5);
}

TEST_CASE("pure transport of the initial condition") {
    HeatLikeProblem p = support::variant(1, R"({"pde":{"P":"0*g","F":"0*k"}})");
    CrispInstance inst = instantiate(p, Corner::peak, 1.0);
    VimResult r = solve_crisp(inst);
    CHECK(r.converged);
    CHECK(sup_norm_diff(r.solution, sample(p.initial, r.solution.spec(), inst.bindings)) == 0.0);
}

TEST_CASE("solve_crisp matches the closed forms") {
    SUBCASE("Example 1 with c = 2") {
        HeatLikeProblem p = support::variant(1, kPositiveC);
        CrispInstance inst = instantiate(p, Corner::peak, 1.0);
        VimResult r = solve_crisp(inst);
        CHECK(r.converged);
        CHECK(oracle_error(p, inst, r) <= 5e-4);
        CHECK(r.residual_sup < 1e-3);
        CHECK(r.delta_history.size() == static_cast<std::size_t>(r.iterations_used));
    }
    SUBCASE("Example 4 terminates in a few iterations") {
        HeatLikeProblem p = support::example(4);
        CrispInstance inst = instantiate(p, Corner::peak, 1.0);
        VimResult r = solve_crisp(inst);
        CHECK(r.converged);
        CHECK(r.iterations_used <= 3);
        CHECK(oracle_error(p, inst, r) <= 5e-4);
    }
    SUBCASE("Example 5 with a negative coefficient") {
        HeatLikeProblem p = support::example(5);
        CrispInstance inst = instantiate(p, Corner::peak, 1.0);
        VimResult r = solve_crisp(inst);
        CHECK(r.converged);
        CHECK(oracle_error(p, inst, r) <= 5e-4);
    }
    SUBCASE("every corner of Example 3") {
        HeatLikeProblem p = support::example(3);
        GridOverrides o;
        o.nt = o.nx = o.ny = 41;
        for (Corner c : {Corner::lower, Corner::upper}) {
            CrispInstance inst = instantiate(p, c, 0.0);
            VimResult r = solve_crisp(inst, {}, make_grid(p, o));
            CHECK(r.converged);
            CHECK(oracle_error(p, inst, r) <= 5e-4);
        }
    }
}

TEST_CASE("iterates follow the partial sums") {
    HeatLikeProblem p = support::example(1);
    CrispInstance inst = instantiate(p, Corner::peak, 1.0);
    GridSpec g = with_nt(p, 1001, 51);
    std::vector<GridFunction> trace = iterate_trace(inst, 3, g);
    REQUIRE(trace.size() == 4);
    for (int n = 0; n <= 3; ++n) {
        double worst = 0;
        for (std::size_t it = 0; it < g.t.count; ++it) {
            for (std::size_t ix = 0; ix < g.x.count; ++ix) {
                worst = std::max(worst, std::abs(trace[n].at(it, ix) -
                                                 ex1_iterate(n, -1, 1, 1, g.t.node(it), g.x.node(ix))));
            }
        }
        CHECK(worst <= 1e-6);
    }
    CHECK(iterate_trace(inst, 0, g).size() == 1);
    CHECK_THROWS_AS(iterate_trace(inst, -1, g), DomainError);

    // U_1 of Example 3 is linear in t, so the trapezoid rule is exact.
    HeatLikeProblem p3 = support::example(3);
    CrispInstance i3 = instantiate(p3, Corner::peak, 1.0);
    GridOverrides o;
    o.nt = o.nx = o.ny = 21;
    GridSpec g3 = make_grid(p3, o);
    std::vector<GridFunction> t3 = iterate_trace(i3, 1, g3);
    GridFunction want = sample(expr::parse("c1*y^2-c2*x^2+t*(k*x*y+g*c2*x^2-b*c1*y^2)"), g3, i3.bindings);
    CHECK(sup_norm_diff(t3[1], want) < 1e-12);
}

TEST_CASE("truncation error is bounded by the Taylor tail") {
    HeatLikeProblem p = support::example(1);
    CrispInstance inst = instantiate(p, Corner::lower, 0.0);
    GridSpec g = with_nt(p, 1001, 51);
    const double c = *inst.bindings.find("c"), gam = *inst.bindings.find("g");
    GridFunction exact = sample(*p.oracle_G, g, inst.bindings);
    std::vector<GridFunction> trace = iterate_trace(inst, 4, g);
    for (int n = 1; n <= 4; ++n) {
        double tail = std::abs(c) * std::pow(gam, n + 1) / std::tgamma(n + 2) * std::exp(gam);
        CHECK(sup_norm_diff(trace[n], exact) <= tail + 1e-6);
    }
}

TEST_CASE("residual shrinks under time refinement") {
    HeatLikeProblem p = support::example(5);
    CrispInstance inst = instantiate(p, Corner::peak, 1.0);
    double coarse = solve_crisp(inst, {}, with_nt(p, 101)).residual_sup;
    double fine = solve_crisp(inst, {}, with_nt(p, 401)).residual_sup;
    CHECK(fine < coarse / 4);
}

TEST_CASE("failures are reported") {
    HeatLikeProblem p = support::variant(1, R"J({"pde":{"P":"200*g","F":"0*k"},"initial":"c*sin(10*x)"})J");
    CrispInstance inst = instantiate(p, Corner::peak, 1.0);
    VimResult r = solve_crisp(inst);
    CHECK(r.diverged);
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.diagnostic.empty());

    VimConfig tiny;
    tiny.expression_cap = 3;
    CHECK_THROWS_AS(solve_crisp(instantiate(support::example(5), Corner::peak, 1.0), tiny), NumericalError);

    VimConfig bad;
    bad.tolerance = -1;
    CHECK_THROWS_AS(solve_crisp(inst, bad), DomainError);
}

}  // TEST_SUITE
