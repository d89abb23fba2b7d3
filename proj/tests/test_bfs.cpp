#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fuzzyheat/bfs.hpp"
#include "fuzzyheat/errors.hpp"
#include "support.hpp"

using namespace fuzzyheat;

namespace {

const SignEntry* product(const SignProfile& prof, const std::string& label) {
    for (const SignEntry& e : prof.products) {
        if (e.label == label) return &e;
    }
    return nullptr;
}

bool has_note(const ClassificationReport& r, const std::string& text) {
    return std::any_of(r.notes.begin(), r.notes.end(), [&](const std::string& n) { return n.find(text) != std::string::npos; });
}

ClassifyOptions fast() {
    ClassifyOptions o;
    o.sampling.signs.nodes_per_axis = 11;
    o.validate_oracle = false;
    return o;
}

EndpointFunctions endpoints_of(const HeatLikeProblem& p, const expr::Expression& G) {
    return endpoint_functions(p, G, sign_profile(p, G));
}

/// Uniform random point strictly inside the (possibly open) domain.
SpaceTimePoint random_point(const HeatLikeProblem& p, std::mt19937_64& g) {
    auto pick = [&](const AxisDomain& a) { return std::uniform_real_distribution<double>(a.lo, a.hi)(g); };
    SpaceTimePoint q{pick(p.domain.t), pick(p.domain.x), 0.0};
    if (p.domain.y) q.y = pick(*p.domain.y);
    return q;
}

}  // namespace

TEST_SUITE("bfs") {

TEST_CASE("sign profiles of the examples") {
    HeatLikeProblem p1 = support::example(1);
    SignProfile s1 = sign_profile(p1, *p1.oracle_G);
    CHECK(s1.P.sign == Sign::positive);
    CHECK(s1.all_products_positive());
    REQUIRE(product(s1, "(dP/dg)(dG/dg)"));
    REQUIRE(product(s1, "(dG/dk)(dF/dk)"));
    CHECK(s1.partials.at("G").at("c").sign == Sign::positive);
    CHECK(s1.partials.at("G").at("g").sign == Sign::positive);

    HeatLikeProblem p5 = support::example(5);
    SignProfile s5 = sign_profile(p5, *p5.oracle_G);
    CHECK(s5.P.sign == Sign::negative);

    HeatLikeProblem p4 = support::example(4);
    SignProfile s4 = sign_profile(p4, *p4.oracle_G);
    const SignEntry* mixed = product(s4, "(dG/dk)(dF/dk)");
    REQUIRE(mixed);
    CHECK(mixed->sign == Sign::mixed);
    REQUIRE(mixed->positive_witness);
    REQUIRE(mixed->negative_witness);
    CHECK(mixed->positive_witness->value > 0);
    CHECK(mixed->negative_witness->value < 0);
    CHECK(mixed->positive_region.has_value());

    CHECK_THROWS_AS(sign_profile(p1, std::nullopt), UsageError);
}

TEST_CASE("endpoint functions of Example 1") {
    HeatLikeProblem p = support::example(1);
    EndpointFunctions ep = endpoints_of(p, *p.oracle_G);
    // G increases in every parameter, so z1 takes every lower cut end.
    const double a = 0.5, t = 0.4, x = 0.7;
    auto G = [&](double c, double g, double k) { return c * x * x * std::exp(-g * t) + k * t; };
    CHECK(ep.z1.evaluate(a, t, x) == doctest::Approx(G(-1.25, 0.75, 0.75)).epsilon(1e-14));
    CHECK(ep.z2.evaluate(a, t, x) == doctest::Approx(G(-0.75, 1.25, 1.25)).epsilon(1e-14));
    CHECK(ep.F1.evaluate(a, t, x) == doctest::Approx(0.75));
    CHECK(ep.F2.evaluate(a, t, x) == doctest::Approx(1.25));
    CHECK(ep.P1.evaluate(a, t, x) == doctest::Approx(0.375 * x * x));
    CHECK(ep.z1.evaluate(1.0, t, x) == ep.z2.evaluate(1.0, t, x));
    CHECK(*ep.z1.environment(0.0).find("k") == 0.5);
}

TEST_CASE("endpoint functions of Example 3 and Example 4") {
    HeatLikeProblem p3 = support::example(3);
    EndpointFunctions ep = endpoints_of(p3, *p3.oracle_G);
    REQUIRE(ep.Q1);
    // initial = c1 y^2 - c2 x^2: the lower endpoint takes c1 low and c2 high.
    CHECK(ep.initial1.evaluate(0.0, 0.0, 1.0, 1.0) == doctest::Approx(-1.5 - 1.5));
    CHECK(ep.initial2.evaluate(0.0, 0.0, 1.0, 1.0) == doctest::Approx(-0.5 - 0.5));

    HeatLikeProblem p4 = support::example(4);
    CHECK_THROWS_AS(endpoints_of(p4, *p4.oracle_G), UsageError);
}

TEST_CASE("brute force agrees with the monotone endpoints") {
    HeatLikeProblem p = support::example(1);
    EndpointFunctions ep = endpoints_of(p, *p.oracle_G);
    for (double a : {0.0, 0.3, 0.8}) {
        for (SpaceTimePoint q : {SpaceTimePoint{0.2, 0.5}, SpaceTimePoint{1.0, 1.0}}) {
            Interval bf = brute_force_endpoints(p, *p.oracle_G, a, q, 21);
            CHECK(std::abs(bf.lo - ep.z1.evaluate(a, q.t, q.x)) <= 1e-9);
            CHECK(std::abs(bf.hi - ep.z2.evaluate(a, q.t, q.x)) <= 1e-9);
        }
    }
    Interval core = brute_force_endpoints(p, *p.oracle_G, 1.0, {0.5, 0.5}, 5);
    CHECK(core.lo == core.hi);
    Interval constant = brute_force_endpoints(p, expr::parse("2+0*k"), 0.0, {0.5, 0.5}, 5);
    CHECK(constant == Interval{2, 2});
}

TEST_CASE("differentiability conditions") {
    HeatLikeProblem p = support::example(1);
    EndpointFunctions ep = endpoints_of(p, *p.oracle_G);
    DifferentiabilityReport ok = differentiability_check(ep, p);
    CHECK(ok.all_pass());
    CHECK(ok.lower_nondecreasing.checked > 0);

    HeatLikeProblem crisp = support::variant(
        1, R"({"params":[{"name":"k","triangle":[1,1,1]},{"name":"g","triangle":[1,1,1]},{"name":"c","triangle":[-1,-1,-1]}]})");
    CHECK(differentiability_check(endpoints_of(crisp, *crisp.oracle_G), crisp).all_pass());

    // Binding k of the lower endpoint to the upper cut end makes Gamma_1 decrease in alpha.
    EndpointFunctions mutant = ep;
    for (EndpointRule& r : mutant.z1.binding) {
        if (r.name == "k") r.value = [](double a) { return 1.5 - 0.5 * a; };
    }
    DifferentiabilityReport bad = differentiability_check(mutant, p);
    CHECK_FALSE(bad.lower_nondecreasing.pass);
    REQUIRE(bad.lower_nondecreasing.worst);
    CHECK(bad.lower_nondecreasing.worst->amount > 0);
    CHECK(bad.upper_nonincreasing.pass);
}

TEST_CASE("endpoint residuals") {
    HeatLikeProblem p1 = support::example(1);
    CHECK(bfs_residual(endpoints_of(p1, *p1.oracle_G), p1) <= 1e-8);
    CHECK(initial_mismatch(endpoints_of(p1, *p1.oracle_G), p1) <= 1e-8);

    HeatLikeProblem p3 = support::example(3);
    CHECK(bfs_residual(endpoints_of(p3, *p3.oracle_G), p3) <= 1e-8);

    for (double eps : {1e-6, 1e-3}) {
        expr::Expression perturbed = *p1.oracle_G + expr::Expression::constant(eps) * expr::Expression::symbol("t");
        double r = bfs_residual(endpoints_of(p1, perturbed), p1);
        CHECK(r == doctest::Approx(eps).epsilon(1e-6));
    }
}

TEST_CASE("classify verdicts") {
    for (int i : {1, 3}) {
        HeatLikeProblem p = support::example(i);
        ClassificationReport r = classify(p, *p.oracle_G, fast());
        CHECK(r.verdict == Verdict::BFS);
        CHECK_FALSE(r.ss);
    }
    HeatLikeProblem p4 = support::example(4);
    ClassificationReport r4 = classify(p4, *p4.oracle_G, fast());
    CHECK(r4.verdict == Verdict::SS_only);
    CHECK(has_note(r4, "(dG/dk)(dF/dk) is mixed; positive samples lie in"));

    HeatLikeProblem p5 = support::example(5);
    ClassificationReport r5 = classify(p5, *p5.oracle_G, fast());
    CHECK(r5.verdict == Verdict::SS_only);
    CHECK(has_note(r5, "P < 0"));
}

TEST_CASE("a closed form that misses the equation is not BFS") {
    HeatLikeProblem p = support::example(1);
    expr::Expression off = *p.oracle_G + expr::Expression::constant(1e-4) * expr::Expression::symbol("t");
    ClassificationReport r = classify(p, off, fast());
    CHECK(r.verdict != Verdict::BFS);
    CHECK(has_note(r, "endpoint residual"));

    ClassifyOptions checked = fast();
    checked.validate_oracle = true;
    ClassificationReport v = classify(p, *p.oracle_G, checked);
    REQUIRE(v.oracle_vim_error);
    CHECK(*v.oracle_vim_error <= 5e-4);
}

TEST_CASE("verdict is stable under sampling refinement") {
    for (int i = 1; i <= 5; ++i) {
        if (i == 2) continue;
        HeatLikeProblem p = support::example(i);
        ClassifyOptions coarse = fast(), fine = fast();
        fine.sampling.signs.nodes_per_axis = 21;
        CHECK(classify(p, *p.oracle_G, coarse).verdict == classify(p, *p.oracle_G, fine).verdict);
    }
}

TEST_CASE("property: endpoints are ordered and agree with brute force") {
    auto g = support::rng(20);
    std::uniform_real_distribution<double> alpha(0.0, 1.0);
    for (int i : {1, 3}) {
        HeatLikeProblem p = support::example(i);
        EndpointFunctions ep = endpoints_of(p, *p.oracle_G);
        int samples = i == 3 ? 5 : 11;
        for (int n = 0; n < 60; ++n) {
            SpaceTimePoint q = random_point(p, g);
            double a = alpha(g);
            double lo = ep.z1.evaluate(a, q.t, q.x, q.y), hi = ep.z2.evaluate(a, q.t, q.x, q.y);
            CHECK(lo <= hi + 1e-12);
            Interval bf = brute_force_endpoints(p, *p.oracle_G, a, q, samples);
            CHECK(std::abs(bf.lo - lo) <= 1e-8 * (1 + std::abs(lo)));
            CHECK(std::abs(bf.hi - hi) <= 1e-8 * (1 + std::abs(hi)));
        }
    }
}

}  // TEST_SUITE
