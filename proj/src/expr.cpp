#include "fuzzyheat/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "fuzzyheat/errors.hpp"

namespace fuzzyheat::expr {

namespace {

constexpr std::array<std::pair<std::string_view, Op>, 6> kFunctions{{
    {"exp", Op::exp},
    {"sin", Op::sin},
    {"cos", Op::cos},
    {"cosh", Op::cosh},
    {"sinh", Op::sinh},
    {"sqrt", Op::sqrt},
}};

std::shared_ptr<const Node> zero_node() {
    static const auto node = std::make_shared<const Node>();
    return node;
}

}  // namespace

bool is_unary(Op op) noexcept {
    switch (op) {
        case Op::neg:
        case Op::exp:
        case Op::sin:
        case Op::cos:
        case Op::cosh:
        case Op::sinh:
        case Op::sqrt:
            return true;
        default:
            return false;
    }
}

bool is_binary(Op op) noexcept {
    switch (op) {
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
        case Op::pow:
            return true;
        default:
            return false;
    }
}

std::string_view function_name(Op op) noexcept {
    for (const auto& [name, fop] : kFunctions) {
        if (fop == op) return name;
    }
    return {};
}

std::optional<Op> function_from_name(std::string_view name) noexcept {
    for (const auto& [fname, op] : kFunctions) {
        if (fname == name) return op;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Expression

Expression::Expression() : node_(zero_node()) {}

Expression Expression::constant(double value) {
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = value;
    return Expression(std::move(n));
}

Expression Expression::symbol(std::string name) {
    auto n = std::make_shared<Node>();
    n->op = Op::symbol;
    n->name = std::move(name);
    return Expression(std::move(n));
}

Expression Expression::unary(Op op, Expression operand) {
    if (!is_unary(op)) throw UsageError("Expression::unary called with a non-unary operator");
    auto n = std::make_shared<Node>();
    n->op = op;
    n->size = 1 + operand.size();
    n->lhs = std::move(operand.node_);
    return Expression(std::move(n));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
    if (!is_binary(op)) throw UsageError("Expression::binary called with a non-binary operator");
    auto n = std::make_shared<Node>();
    n->op = op;
    n->size = 1 + lhs.size() + rhs.size();
    n->lhs = std::move(lhs.node_);
    n->rhs = std::move(rhs.node_);
    return Expression(std::move(n));
}

Op Expression::op() const noexcept { return node_->op; }
double Expression::value() const noexcept { return node_->value; }
const std::string& Expression::name() const noexcept { return node_->name; }
Expression Expression::operand() const { return Expression(node_->lhs); }
Expression Expression::lhs() const { return Expression(node_->lhs); }
Expression Expression::rhs() const { return Expression(node_->rhs); }
std::size_t Expression::size() const noexcept { return node_->size; }

Expression operator+(const Expression& a, const Expression& b) { return Expression::binary(Op::add, a, b); }
Expression operator-(const Expression& a, const Expression& b) { return Expression::binary(Op::sub, a, b); }
Expression operator*(const Expression& a, const Expression& b) { return Expression::binary(Op::mul, a, b); }
Expression operator/(const Expression& a, const Expression& b) { return Expression::binary(Op::div, a, b); }
Expression operator-(const Expression& a) { return Expression::unary(Op::neg, a); }
Expression pow(const Expression& base, double exponent) {
    return Expression::binary(Op::pow, base, Expression::constant(exponent));
}

std::optional<double> Environment::find(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expression parse_all() {
        Expression e = parse_expression();
        skip_space();
        if (pos_ != text_.size()) {
            throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_,
                             {"+", "-", "*", "/", "^", "end of input"});
        }
        return e;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expression parse_expression() {
        Expression lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = lhs + parse_term();
            } else if (accept('-')) {
                lhs = lhs - parse_term();
            } else {
                return lhs;
            }
        }
    }

    Expression parse_term() {
        Expression lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = lhs * parse_unary();
            } else if (accept('/')) {
                lhs = lhs / parse_unary();
            } else {
                return lhs;
            }
        }
    }

    Expression parse_unary() {
        if (accept('-')) {
            Expression operand = parse_unary();
            // Fold literal negation so "-2" prints and reparses as a constant.
            if (operand.is_constant()) return Expression::constant(-operand.value());
            return -operand;
        }
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expression parse_power() {
        Expression base = parse_primary();
        if (accept('^')) {
            skip_space();
            std::size_t exponent_offset = pos_;
            Expression exponent = simplify(parse_unary());
            if (!exponent.is_constant()) {
                throw ParseError("exponent must be a constant", exponent_offset);
            }
            return Expression::binary(Op::pow, base, exponent);
        }
        return base;
    }

    Expression parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            throw ParseError("unexpected end of input", pos_, {"number", "identifier", "(", "-"});
        }
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expression inner = parse_expression();
            if (!accept(')')) {
                skip_space();
                throw ParseError("expected ')'", pos_, {")"});
            }
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_,
                         {"number", "identifier", "(", "-"});
    }

    Expression parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc() || ptr != text_.data() + pos_) {
            throw ParseError("malformed number", start, {"number"});
        }
        return Expression::constant(value);
    }

    Expression parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        std::string name(text_.substr(start, pos_ - start));
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            auto fn = function_from_name(name);
            if (!fn) throw ParseError("unknown function '" + name + "'", start);
            ++pos_;
            Expression arg = parse_expression();
            if (!accept(')')) {
                skip_space();
                throw ParseError("expected ')'", pos_, {")"});
            }
            return Expression::unary(*fn, arg);
        }
        if (function_from_name(name)) {
            throw ParseError("function '" + name + "' used without arguments", start, {"("});
        }
        return Expression::symbol(std::move(name));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string format_constant(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Prefer the shortest representation that round-trips.
    for (int precision = 1; precision < 17; ++precision) {
        char shorter[64];
        std::snprintf(shorter, sizeof shorter, "%.*g", precision, v);
        double back = 0.0;
        std::from_chars(shorter, shorter + std::char_traits<char>::length(shorter), back);
        if (back == v) return v < 0 ? "(" + std::string(shorter) + ")" : std::string(shorter);
    }
    return v < 0 ? "(" + std::string(buf) + ")" : std::string(buf);
}

char binary_symbol(Op op) {
    switch (op) {
        case Op::add: return '+';
        case Op::sub: return '-';
        case Op::mul: return '*';
        case Op::div: return '/';
        default: return '^';
    }
}

void print(const Expression& e, std::string& out) {
    switch (e.op()) {
        case Op::constant:
            out += format_constant(e.value());
            return;
        case Op::symbol:
            out += e.name();
            return;
        case Op::neg:
            out += "(-";
            print(e.operand(), out);
            out += ')';
            return;
        default:
            break;
    }
    if (is_unary(e.op())) {
        out += function_name(e.op());
        out += '(';
        print(e.operand(), out);
        out += ')';
        return;
    }
    out += '(';
    print(e.lhs(), out);
    out += ' ';
    out += binary_symbol(e.op());
    out += ' ';
    print(e.rhs(), out);
    out += ')';
}

[[noreturn]] void singular(const std::string& what, const Expression& sub) {
    throw EvaluationError(what + " in " + to_string(sub), to_string(sub));
}

double apply_unary(Op op, double a, const Expression& sub) {
    switch (op) {
        case Op::neg: return -a;
        case Op::exp: return std::exp(a);
        case Op::sin: return std::sin(a);
        case Op::cos: return std::cos(a);
        case Op::cosh: return std::cosh(a);
        case Op::sinh: return std::sinh(a);
        case Op::sqrt:
            if (a < 0.0) singular("square root of a negative value", sub);
            return std::sqrt(a);
        default:
            break;
    }
    throw UsageError("not a unary operator");
}

double apply_binary(Op op, double a, double b, const Expression& sub) {
    switch (op) {
        case Op::add: return a + b;
        case Op::sub: return a - b;
        case Op::mul: return a * b;
        case Op::div:
            if (b == 0.0) singular("division by zero", sub);
            return a / b;
        case Op::pow: {
            if (a == 0.0 && b < 0.0) singular("division by zero", sub);
            if (a < 0.0 && b != std::floor(b)) singular("fractional power of a negative value", sub);
            if (b == 2.0) return a * a;
            return std::pow(a, b);
        }
        default:
            break;
    }
    throw UsageError("not a binary operator");
}

double eval_node(const Expression& e, const Environment& env) {
    switch (e.op()) {
        case Op::constant:
            return e.value();
        case Op::symbol: {
            auto v = env.find(e.name());
            if (!v) throw EvaluationError("unbound symbol '" + e.name() + "'", e.name());
            return *v;
        }
        default:
            break;
    }
    if (is_unary(e.op())) return apply_unary(e.op(), eval_node(e.operand(), env), e);
    return apply_binary(e.op(), eval_node(e.lhs(), env), eval_node(e.rhs(), env), e);
}

// ---------------------------------------------------------------------------
// Simplification

std::optional<double> try_fold(const Expression& e) {
    try {
        double v = eval_node(e, Environment{});
        if (std::isfinite(v)) return v;
    } catch (const EvaluationError&) {
    }
    return std::nullopt;
}

Expression rewrite(const Expression& e);

Expression simplify_mul(const Expression& a, const Expression& b) {
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expression::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    // Constants move to the left of a product.
    if (b.is_constant() && !a.is_constant()) return simplify_mul(b, a);
    if (a.is_constant()) {
        if (a.value() == -1.0) return rewrite(-b);
        if (b.op() == Op::mul && b.lhs().is_constant()) {
            return simplify_mul(Expression::constant(a.value() * b.lhs().value()), b.rhs());
        }
        if (b.op() == Op::neg) return simplify_mul(Expression::constant(-a.value()), b.operand());
    }
    if (a.op() == Op::neg) return rewrite(-(simplify_mul(a.operand(), b)));
    if (b.op() == Op::neg) return rewrite(-(simplify_mul(a, b.operand())));
    if (a.op() == Op::mul && a.lhs().is_constant() && !b.is_constant()) {
        return simplify_mul(a.lhs(), simplify_mul(a.rhs(), b));
    }
    if (b.op() == Op::mul && b.lhs().is_constant()) {
        return simplify_mul(b.lhs(), simplify_mul(a, b.rhs()));
    }
    return a * b;
}

Expression rewrite(const Expression& e) {
    if (e.op() == Op::constant || e.op() == Op::symbol) return e;

    if (is_unary(e.op())) {
        Expression a = e.operand();
        Expression u = Expression::unary(e.op(), a);
        if (a.is_constant()) {
            if (auto v = try_fold(u)) return Expression::constant(*v);
        }
        if (e.op() == Op::neg) {
            if (a.op() == Op::neg) return a.operand();
            if (a.op() == Op::mul && a.lhs().is_constant()) {
                return simplify_mul(Expression::constant(-a.lhs().value()), a.rhs());
            }
            if (a.op() == Op::sub) return a.rhs() - a.lhs();
        }
        return u;
    }

    Expression a = e.lhs();
    Expression b = e.rhs();
    if (a.is_constant() && b.is_constant()) {
        if (auto v = try_fold(Expression::binary(e.op(), a, b))) return Expression::constant(*v);
    }
    switch (e.op()) {
        case Op::add:
            if (a.is_constant(0.0)) return b;
            if (b.is_constant(0.0)) return a;
            if (b.op() == Op::neg) return a - b.operand();
            if (b.is_constant() && b.value() < 0.0) return a - Expression::constant(-b.value());
            if (a.op() == Op::neg) return b - a.operand();
            return a + b;
        case Op::sub:
            if (b.is_constant(0.0)) return a;
            if (a.is_constant(0.0)) return rewrite(-b);
            if (structurally_equal(a, b)) return Expression::constant(0.0);
            if (b.op() == Op::neg) return a + b.operand();
            if (b.is_constant() && b.value() < 0.0) return a + Expression::constant(-b.value());
            return a - b;
        case Op::mul:
            return simplify_mul(a, b);
        case Op::div:
            if (a.is_constant(0.0)) return Expression::constant(0.0);
            if (b.is_constant(1.0)) return a;
            if (b.is_constant(-1.0)) return rewrite(-a);
            return a / b;
        case Op::pow:
            if (b.is_constant(0.0)) return Expression::constant(1.0);
            if (b.is_constant(1.0)) return a;
            return Expression::binary(Op::pow, a, b);
        default:
            break;
    }
    return e;
}

Expression simplify_once(const Expression& e) {
    if (e.op() == Op::constant || e.op() == Op::symbol) return e;
    if (is_unary(e.op())) return rewrite(Expression::unary(e.op(), simplify_once(e.operand())));
    return rewrite(Expression::binary(e.op(), simplify_once(e.lhs()), simplify_once(e.rhs())));
}

Expression derive(const Expression& e, std::string_view s) {
    if (!depends_on(e, s)) return Expression::constant(0.0);
    switch (e.op()) {
        case Op::constant:
            return Expression::constant(0.0);
        case Op::symbol:
            return Expression::constant(e.name() == s ? 1.0 : 0.0);
        case Op::neg:
            return -derive(e.operand(), s);
        case Op::exp:
            return e * derive(e.operand(), s);
        case Op::sin:
            return Expression::unary(Op::cos, e.operand()) * derive(e.operand(), s);
        case Op::cos:
            return -(Expression::unary(Op::sin, e.operand()) * derive(e.operand(), s));
        case Op::cosh:
            return Expression::unary(Op::sinh, e.operand()) * derive(e.operand(), s);
        case Op::sinh:
            return Expression::unary(Op::cosh, e.operand()) * derive(e.operand(), s);
        case Op::sqrt:
            return derive(e.operand(), s) / (Expression::constant(2.0) * e);
        case Op::add:
            return derive(e.lhs(), s) + derive(e.rhs(), s);
        case Op::sub:
            return derive(e.lhs(), s) - derive(e.rhs(), s);
        case Op::mul: {
            Expression a = e.lhs();
            Expression b = e.rhs();
            if (!depends_on(a, s)) return a * derive(b, s);
            if (!depends_on(b, s)) return derive(a, s) * b;
            return derive(a, s) * b + a * derive(b, s);
        }
        case Op::div: {
            Expression a = e.lhs();
            Expression b = e.rhs();
            if (!depends_on(b, s)) return derive(a, s) / b;
            return (derive(a, s) * b - a * derive(b, s)) / pow(b, 2.0);
        }
        case Op::pow: {
            double n = e.rhs().value();
            Expression base = e.lhs();
            return Expression::constant(n) * pow(base, n - 1.0) * derive(base, s);
        }
    }
    return Expression::constant(0.0);
}

void collect_symbols(const Node* n, std::set<std::string>& out) {
    if (!n) return;
    if (n->op == Op::symbol) out.insert(n->name);
    collect_symbols(n->lhs.get(), out);
    collect_symbols(n->rhs.get(), out);
}

bool node_depends_on(const Node* n, std::string_view s) {
    if (!n) return false;
    if (n->op == Op::symbol) return n->name == s;
    return node_depends_on(n->lhs.get(), s) || node_depends_on(n->rhs.get(), s);
}

bool nodes_equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op || a->size != b->size) return false;
    if (a->op == Op::constant) return a->value == b->value;
    if (a->op == Op::symbol) return a->name == b->name;
    return nodes_equal(a->lhs.get(), b->lhs.get()) && nodes_equal(a->rhs.get(), b->rhs.get());
}

Expression substitute_node(const Expression& e, const Environment& env) {
    switch (e.op()) {
        case Op::constant:
            return e;
        case Op::symbol: {
            auto v = env.find(e.name());
            return v ? Expression::constant(*v) : e;
        }
        default:
            break;
    }
    if (is_unary(e.op())) return Expression::unary(e.op(), substitute_node(e.operand(), env));
    return Expression::binary(e.op(), substitute_node(e.lhs(), env), substitute_node(e.rhs(), env));
}

}  // namespace

Expression parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Expression& e) {
    std::string out;
    print(e, out);
    return out;
}

double evaluate(const Expression& e, const Environment& env) { return eval_node(e, env); }

Expression simplify(const Expression& e) {
    Expression current = e;
    // Each pass shrinks or keeps the tree; a handful of passes reaches the fixed point.
    for (int pass = 0; pass < 64; ++pass) {
        Expression next = simplify_once(current);
        if (structurally_equal(next, current)) return next;
        current = next;
    }
    return current;
}

Expression differentiate(const Expression& e, std::string_view symbol) { return simplify(derive(e, symbol)); }

Expression substitute(const Expression& e, const Environment& env) { return simplify(substitute_node(e, env)); }

std::set<std::string> free_symbols(const Expression& e) {
    std::set<std::string> out;
    collect_symbols(e.node(), out);
    return out;
}

bool depends_on(const Expression& e, std::string_view symbol) { return node_depends_on(e.node(), symbol); }

bool structurally_equal(const Expression& a, const Expression& b) { return nodes_equal(a.node(), b.node()); }

// ---------------------------------------------------------------------------
// CompiledExpression

CompiledExpression::CompiledExpression(const Expression& e, std::span<const std::string> slots) : source_(e) {
    std::size_t depth = 0;
    std::function<void(const Expression&)> emit = [&](const Expression& sub) {
        Instruction ins{sub.op(), 0.0, 0, sub};
        switch (sub.op()) {
            case Op::constant:
                ins.value = sub.value();
                ++depth;
                break;
            case Op::symbol: {
                auto it = std::find(slots.begin(), slots.end(), sub.name());
                if (it == slots.end()) {
                    throw EvaluationError("unbound symbol '" + sub.name() + "'", sub.name());
                }
                ins.slot = static_cast<std::size_t>(it - slots.begin());
                ++depth;
                break;
            }
            default:
                if (is_unary(sub.op())) {
                    emit(sub.operand());
                } else {
                    emit(sub.lhs());
                    emit(sub.rhs());
                    --depth;
                }
                break;
        }
        max_depth_ = std::max(max_depth_, depth);
        program_.push_back(std::move(ins));
    };
    emit(e);
}

double CompiledExpression::operator()(std::span<const double> slot_values) const {
    constexpr std::size_t kInline = 64;
    std::array<double, kInline> inline_stack{};
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }
    std::size_t top = 0;
    for (const Instruction& ins : program_) {
        switch (ins.op) {
            case Op::constant:
                stack[top++] = ins.value;
                break;
            case Op::symbol:
                stack[top++] = slot_values[ins.slot];
                break;
            case Op::add:
                --top;
                stack[top - 1] += stack[top];
                break;
            case Op::sub:
                --top;
                stack[top - 1] -= stack[top];
                break;
            case Op::mul:
                --top;
                stack[top - 1] *= stack[top];
                break;
            case Op::div:
            case Op::pow:
                --top;
                stack[top - 1] = apply_binary(ins.op, stack[top - 1], stack[top], ins.node);
                break;
            default:
                stack[top - 1] = apply_unary(ins.op, stack[top - 1], ins.node);
                break;
        }
    }
    return stack[0];
}

}  // namespace fuzzyheat::expr
