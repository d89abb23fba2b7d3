#pragma once

// Heat-like problems  U_t + P U_xx (+ Q U_yy) = F  with triangular fuzzy
// parameters, and the JSON problem-file format that describes them.
//
// Problem file (all keys besides those marked optional are required):
//
//   {
//     "name": "ex1",                                   optional
//     "pde": {
//       "dimension": 1 | 2,
//       "P": "<expr>", "Q": "<expr>" (2D only), "F": "<expr>",
//       "orientation": "eq2" | "eq3"                   optional, 2D only, default eq2
//     },
//     "initial": "<expr in x[,y] and parameters>",
//     "params": [
//       { "name": "k", "triangle": [u1, u2, u3],
//         "range": [lo, hi],                           optional, default [u1, u3]
//         "shape": "triangular" }                      optional
//     ],
//     "domain": {
//       "M1": 1.0, "M2": 1.0, "M3": 1.0 (2D),
//       "x_min": 0.0, "y_min": 0.0,                    optional
//       "nt": 101, "nx": 101, "ny": 101,               optional
//       "open": ["t_min", "x_min", "x_max", ...]       optional
//     },
//     "alpha": { "level_count": 11 },                  optional
//     "oracle": {                                      optional
//       "G": "<closed-form crisp solution>",
//       "ss": { "u1": "<expr>", "u2": "<expr>" }       p_lo / p_hi name the cut of parameter p
//     },
//     "expect": { ... }                                optional, free-form, used by `reproduce`
//   }
//
// Orientation eq2 puts P on U_xx and Q on U_yy; eq3 swaps them.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fuzzyheat/expr.hpp"
#include "fuzzyheat/fuzzy.hpp"
#include "fuzzyheat/grid.hpp"

namespace fuzzyheat {

struct FuzzyParameter {
    std::string name;
    TriangularFuzzy shape;
    Interval admissible_range;

    Interval cut(double alpha) const { return shape.cut(alpha); }
};

enum class Orientation { eq2, eq3 };

struct AxisDomain {
    double lo = 0.0;
    double hi = 1.0;
    bool open_lo = false;
    bool open_hi = false;
    std::size_t count = 101;
};

struct DomainSpec {
    AxisDomain t;
    AxisDomain x;
    std::optional<AxisDomain> y;
};

struct SsOracle {
    expr::Expression u1;
    expr::Expression u2;
};

struct HeatLikeProblem {
    std::string name;
    int dimension = 1;
    expr::Expression P;
    std::optional<expr::Expression> Q;
    expr::Expression F;
    expr::Expression initial;
    std::vector<FuzzyParameter> parameters;
    DomainSpec domain;
    Orientation orientation = Orientation::eq2;
    int alpha_levels = 11;

    std::optional<expr::Expression> oracle_G;
    std::optional<SsOracle> oracle_ss;
    nlohmann::json expect = nlohmann::json::object();

    const FuzzyParameter* find_parameter(std::string_view name) const;
    std::vector<std::string> parameter_names() const;
    /// Spatial variable names in use: {"x"} or {"x","y"}.
    std::vector<std::string> space_variables() const;

    /// Coefficient of U_xx after applying the orientation.
    const expr::Expression& xx_coefficient() const;
    /// Coefficient of U_yy (2D only).
    const expr::Expression* yy_coefficient() const;
};

/// Throws ValidationError (schema, shapes, undeclared symbols) or ParseError,
/// both with the offending key in the message.
HeatLikeProblem load_problem(std::string_view document);
/// Throws IoError when the file cannot be read.
HeatLikeProblem load_problem_file(const std::string& path);

nlohmann::json problem_to_json(const HeatLikeProblem& p);
std::string save_problem(const HeatLikeProblem& p);

bool structurally_equal(const HeatLikeProblem& a, const HeatLikeProblem& b);

enum class Corner { lower, upper, peak };
using CornerChoice = std::variant<Corner, double>;

struct CrispInstance {
    const HeatLikeProblem* problem = nullptr;
    expr::Environment bindings;
    double alpha = 1.0;
};

/// Every parameter must appear in `selection`. Explicit values are checked
/// against the alpha-cut (DomainError when outside).
CrispInstance instantiate(const HeatLikeProblem& p, const std::map<std::string, CornerChoice>& selection,
                          double alpha);
CrispInstance instantiate(const HeatLikeProblem& p, Corner all, double alpha);

struct GridOverrides {
    std::optional<std::size_t> nt;
    std::optional<std::size_t> nx;
    std::optional<std::size_t> ny;
};

/// Closed box of the domain; an open spatial end is moved inward by one
/// spacing when P, Q, F or the initial condition cannot be evaluated there.
GridSpec make_grid(const HeatLikeProblem& p, const GridOverrides& overrides = {});

}  // namespace fuzzyheat
