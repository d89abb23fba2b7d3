#pragma once

// Closed-form expressions over t, x, y and named parameters.
//
// Grammar accepted by parse() (whitespace is insignificant):
//
//   expression = term , { ("+" | "-") , term } ;
//   term       = unary , { ("*" | "/") , unary } ;
//   unary      = ("-" | "+") , unary | power ;
//   power      = primary , [ "^" , unary ] ;          (right associative)
//   primary    = number | identifier | function , "(" , expression , ")"
//              | "(" , expression , ")" ;
//   function   = "exp" | "sin" | "cos" | "cosh" | "sinh" | "sqrt" ;
//   number     = digits , [ "." , digits ] , [ ("e" | "E") , [ "+" | "-" ] , digits ] ;
//   identifier = letter , { letter | digit | "_" } ;
//
// The exponent of "^" must reduce to a constant. Unary minus binds weaker
// than "^", so "-x^2" is -(x^2).

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fuzzyheat::expr {

enum class Op {
    constant,
    symbol,
    neg,
    exp,
    sin,
    cos,
    cosh,
    sinh,
    sqrt,
    add,
    sub,
    mul,
    div,
    pow,
};

bool is_unary(Op op) noexcept;
bool is_binary(Op op) noexcept;
std::string_view function_name(Op op) noexcept;
std::optional<Op> function_from_name(std::string_view name) noexcept;

struct Node;

/// Immutable expression tree with shared structure.
class Expression {
public:
    /// The constant 0.
    Expression();

    static Expression constant(double value);
    static Expression symbol(std::string name);
    static Expression unary(Op op, Expression operand);
    static Expression binary(Op op, Expression lhs, Expression rhs);

    Op op() const noexcept;
    double value() const noexcept;
    const std::string& name() const noexcept;
    Expression operand() const;
    Expression lhs() const;
    Expression rhs() const;

    bool is_constant() const noexcept { return op() == Op::constant; }
    bool is_constant(double v) const noexcept { return is_constant() && value() == v; }

    /// Number of nodes in the tree (shared subtrees counted every time).
    std::size_t size() const noexcept;

    const Node* node() const noexcept { return node_.get(); }

private:
    explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op = Op::constant;
    double value = 0.0;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    std::size_t size = 1;
};

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, double exponent);

/// Symbol bindings used for evaluation and substitution.
class Environment {
public:
    Environment() = default;
    Environment(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

    void set(const std::string& name, double value) { values_[name] = value; }
    std::optional<double> find(const std::string& name) const;
    bool contains(const std::string& name) const { return values_.contains(name); }
    const std::unordered_map<std::string, double>& values() const noexcept { return values_; }

private:
    std::unordered_map<std::string, double> values_;
};

Expression parse(std::string_view text);

/// Fully parenthesized canonical text; parse(to_string(e)) evaluates like e.
std::string to_string(const Expression& e);

double evaluate(const Expression& e, const Environment& env);

/// Exact structural derivative, simplified.
Expression differentiate(const Expression& e, std::string_view symbol);

/// Local semantics-preserving rewrites; idempotent.
Expression simplify(const Expression& e);

/// Replaces every bound symbol by its constant value, then simplifies.
Expression substitute(const Expression& e, const Environment& env);

std::set<std::string> free_symbols(const Expression& e);
bool depends_on(const Expression& e, std::string_view symbol);
bool structurally_equal(const Expression& a, const Expression& b);

/// Flattened stack program for fast repeated evaluation. Symbols are mapped
/// to positions in a slot vector fixed at compile time.
class CompiledExpression {
public:
    CompiledExpression() = default;
    CompiledExpression(const Expression& e, std::span<const std::string> slots);

    double operator()(std::span<const double> slot_values) const;

    const Expression& source() const noexcept { return source_; }

private:
    struct Instruction {
        Op op;
        double value = 0.0;
        std::size_t slot = 0;
        Expression node;
    };

    Expression source_;
    std::vector<Instruction> program_;
    std::size_t max_depth_ = 0;
};

}  // namespace fuzzyheat::expr
