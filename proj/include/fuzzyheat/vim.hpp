#pragma once

// Variational iteration with multiplier -1 for linear heat-like problems.
//
// For  U_t + L U = F  with L = P d2/dx2 + Q d2/dy2  the correction functional
// gives  U_{n+1} = U_n(0) + I[F - L U_n],  I the time integral from 0.  The
// solver keeps every increment as  I^m[E]  with E a closed-form expression in
// (t, x, y): L acts on E symbolically and only the repeated time integrals are
// numerical (cumulative trapezoid on the grid).  Increments then obey
//   D_1 = I[F - L U_0],   D_{n+1} = -I[L D_n].
// The same engine runs small systems whose equations take their second
// derivatives from another component, which is how endpoint systems with a
// negative coefficient are coupled.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fuzzyheat/expr.hpp"
#include "fuzzyheat/grid.hpp"
#include "fuzzyheat/problem.hpp"

namespace fuzzyheat {

struct VimConfig {
    int max_iterations = 50;
    double tolerance = 1e-8;
    double divergence_guard = 1e12;
    /// Increments whose expression tree grows past this many nodes abort the run.
    std::size_t expression_cap = 200000;

    void validate() const;
};

/// One equation  (u_i)_t + Pxx (u_{xx_source})_xx + Qyy (u_{yy_source})_yy = F,
/// with every expression already free of parameters.
struct VimEquation {
    expr::Expression initial;
    expr::Expression F;
    expr::Expression Pxx;
    std::size_t xx_source = 0;
    std::optional<expr::Expression> Qyy;
    std::size_t yy_source = 0;
};

struct VimSystem {
    std::vector<VimEquation> equations;
};

struct VimResult {
    GridFunction solution;
    int iterations_used = 0;
    double final_delta = 0.0;
    double residual_sup = 0.0;
    bool converged = false;
    bool diverged = false;
    std::string diagnostic;
    std::vector<double> delta_history;
};

struct VimSystemResult {
    std::vector<GridFunction> solutions;
    int iterations_used = 0;
    double final_delta = 0.0;
    double residual_sup = 0.0;
    bool converged = false;
    bool diverged = false;
    std::string diagnostic;
    std::vector<double> delta_history;
    /// Closed-form part of each increment, per iteration and equation.
    std::vector<std::vector<expr::Expression>> increments;
};

/// The crisp equation of an instance as a one-equation system.
VimSystem crisp_system(const CrispInstance& inst);

VimSystemResult solve_system(const VimSystem& sys, const GridSpec& grid, const VimConfig& cfg = {});

/// U_0 ... U_n of every equation: result[k][i] is iterate k of equation i.
std::vector<std::vector<GridFunction>> system_trace(const VimSystem& sys, const GridSpec& grid, int n,
                                                    const VimConfig& cfg = {});

/// Sup-norm of  u_t + Pxx u_xx + Qyy u_yy - F  over interior nodes, with
/// u_t by second-order differences and the spatial terms exact.
double system_residual(const VimSystem& sys, const VimSystemResult& res);

VimResult solve_crisp(const CrispInstance& inst, const VimConfig& cfg = {},
                      const std::optional<GridSpec>& grid = std::nullopt);

std::vector<GridFunction> iterate_trace(const CrispInstance& inst, int n,
                                        const std::optional<GridSpec>& grid = std::nullopt);

/// One step of the correction functional on grid values only: time derivative
/// by second-order differences, spatial terms by three-point stencils.
GridFunction correction_step(const GridFunction& Un, const CrispInstance& inst);

/// Values of e on the grid, with the bindings substituted first.
GridFunction sample(const expr::Expression& e, const GridSpec& grid, const expr::Environment& bindings = {});

}  // namespace fuzzyheat
