#pragma once

// Buckley-Feuring analysis: endpoint functions of a fuzzified closed form,
// the differentiability conditions on  Gamma = z_t + P z_xx + Q z_yy, the
// endpoint residuals, and the overall verdict.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fuzzyheat/expr.hpp"
#include "fuzzyheat/fuzzy.hpp"
#include "fuzzyheat/problem.hpp"
#include "fuzzyheat/signs.hpp"
#include "fuzzyheat/vim.hpp"

namespace fuzzyheat {

struct SsSolution;

/// Value of one parameter as a function of alpha.
struct EndpointRule {
    std::string name;
    std::function<double(double)> value;
};

using EndpointBinding = std::vector<EndpointRule>;

/// A closed-form expression together with the alpha-dependent parameter values it is read at.
struct BoundEndpoint {
    expr::Expression expression;
    EndpointBinding binding;

    expr::Environment environment(double alpha) const;
    /// Expression with the parameters replaced by their values at alpha.
    expr::Expression at(double alpha) const;
    double evaluate(double alpha, double t, double x, double y = 0.0) const;
};

enum class Endpoint { lower, upper };

/// Binds every parameter of e to the cut end that minimises (lower) or maximises (upper) e.
/// Throws UsageError when a direction in `partials` is mixed.
BoundEndpoint monotone_endpoint(const HeatLikeProblem& p, const expr::Expression& e,
                                const std::map<std::string, SignEntry>& partials, Endpoint which);

struct EndpointFunctions {
    BoundEndpoint z1, z2;
    BoundEndpoint F1, F2;
    BoundEndpoint P1, P2;
    std::optional<BoundEndpoint> Q1, Q2;
    BoundEndpoint initial1, initial2;
};

/// Throws UsageError when a needed direction is mixed (use brute_force_endpoints instead).
EndpointFunctions endpoint_functions(const HeatLikeProblem& p, const expr::Expression& G, const SignProfile& profile);

struct SpaceTimePoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Min and max of G over a lattice of the alpha-cut parameter box.
Interval brute_force_endpoints(const HeatLikeProblem& p, const expr::Expression& G, double alpha,
                               const SpaceTimePoint& point, int samples_per_axis);

struct Violation {
    SpaceTimePoint point;
    double alpha = 0.0;
    double amount = 0.0;
};

struct ConditionReport {
    std::string name;
    bool pass = true;
    std::size_t checked = 0;
    std::optional<Violation> worst;
};

struct DifferentiabilityReport {
    ConditionReport lower_nondecreasing;  // (i)
    ConditionReport upper_nonincreasing;  // (ii)
    ConditionReport core_ordered;         // (iii)

    bool all_pass() const noexcept {
        return lower_nondecreasing.pass && upper_nonincreasing.pass && core_ordered.pass;
    }
};

struct BfsSampling {
    SamplingConfig signs;
    /// Relative slack for monotonicity in alpha: tol = slack * (1 + |value|).
    double slack = 1e-9;
};

/// Gamma_i = (z_i)_t + Pxx_i (z_i)_xx + Qyy_i (z_i)_yy, evaluated on the sample lattice.
struct GammaSamples {
    std::vector<double> alphas;
    std::vector<SpaceTimePoint> points;
    /// gamma[i][a * points.size() + k] for endpoint i in {0, 1}.
    std::vector<double> gamma[2];
    std::vector<double> source[2];
};

GammaSamples gamma_samples(const EndpointFunctions& ep, const HeatLikeProblem& p, const BfsSampling& cfg = {});

DifferentiabilityReport differentiability_check(const EndpointFunctions& ep, const HeatLikeProblem& p,
                                                const BfsSampling& cfg = {});

/// Sup of |Gamma_i - F_i| over the sample lattice.
double bfs_residual(const EndpointFunctions& ep, const HeatLikeProblem& p, const BfsSampling& cfg = {});

/// Sup of |z_i(0, x, y) - initial_i(x, y)| over the lattice.
double initial_mismatch(const EndpointFunctions& ep, const HeatLikeProblem& p, const BfsSampling& cfg = {});

enum class Verdict { BFS, SS_only, none };

const char* to_string(Verdict v) noexcept;

struct ClassifyOptions {
    BfsSampling sampling;
    double residual_tolerance = 1e-8;
    VimConfig vim;
    GridOverrides grid;
    /// Also solve the crisp core problem by VIM and compare with G.
    bool validate_oracle = true;
};

struct ClassificationReport {
    Verdict verdict = Verdict::none;
    SignProfile sign_profile;
    std::optional<DifferentiabilityReport> differentiability;
    std::optional<double> residual_sup;
    std::optional<double> initial_mismatch;
    std::vector<std::string> notes;
    std::shared_ptr<SsSolution> ss;
    std::optional<double> oracle_vim_error;
};

ClassificationReport classify(const HeatLikeProblem& p, const expr::Expression& G, const ClassifyOptions& opt = {});

}  // namespace fuzzyheat
