#include "fuzzyheat/problem.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fuzzyheat/errors.hpp"

namespace fuzzyheat {

using nlohmann::json;
namespace ex = fuzzyheat::expr;

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) invalid(where, std::string("missing key '") + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) invalid(where, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) invalid(where, "expected a finite number");
    return d;
}

std::size_t count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 3) invalid(where, "expected an integer >= 3");
    return static_cast<std::size_t>(v.get<long long>());
}

ex::Expression expression(const json& v, const std::string& where) {
    if (!v.is_string()) invalid(where, "expected an expression string");
    try {
        return ex::parse(v.get<std::string>());
    } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what() + " (offset " + std::to_string(e.offset()) + ")", e.offset(),
                         e.expected());
    }
}

void check_symbols(const ex::Expression& e, const std::set<std::string>& allowed, const std::string& where) {
    for (const std::string& s : ex::free_symbols(e)) {
        if (!allowed.contains(s)) invalid(where, "undeclared symbol '" + s + "'");
    }
}

Interval pair(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) invalid(where, "expected [lo, hi]");
    Interval r{number(v[0], where), number(v[1], where)};
    if (r.lo > r.hi) invalid(where, "lo exceeds hi");
    return r;
}

}  // namespace

const FuzzyParameter* HeatLikeProblem::find_parameter(std::string_view n) const {
    for (const FuzzyParameter& p : parameters) {
        if (p.name == n) return &p;
    }
    return nullptr;
}

std::vector<std::string> HeatLikeProblem::parameter_names() const {
    std::vector<std::string> out;
    for (const FuzzyParameter& p : parameters) out.push_back(p.name);
    return out;
}

std::vector<std::string> HeatLikeProblem::space_variables() const {
    if (dimension == 2) return {"x", "y"};
    return {"x"};
}

const ex::Expression& HeatLikeProblem::xx_coefficient() const {
    if (dimension == 2 && orientation == Orientation::eq3) return *Q;
    return P;
}

const ex::Expression* HeatLikeProblem::yy_coefficient() const {
    if (dimension != 2) return nullptr;
    return orientation == Orientation::eq3 ? &P : &*Q;
}

HeatLikeProblem load_problem(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("problem file is not valid JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object()) invalid("document", "expected an object");

    HeatLikeProblem p;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) invalid("name", "expected a string");
        p.name = doc["name"].get<std::string>();
    }

    // Parameters first so expressions can be checked against them.
    const json& params = require(doc, "params", "document");
    if (!params.is_array()) invalid("params", "expected an array");
    std::set<std::string> declared;
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::string where = "params[" + std::to_string(i) + "]";
        const json& entry = params[i];
        const json& name = require(entry, "name", where);
        if (!name.is_string()) invalid(where + ".name", "expected a string");
        FuzzyParameter fp;
        fp.name = name.get<std::string>();
        where = "params." + fp.name;
        if (fp.name == "t" || fp.name == "x" || fp.name == "y") invalid(where, "name collides with a variable");
        if (ex::function_from_name(fp.name) || fp.name.empty() ||
            !(std::isalpha(static_cast<unsigned char>(fp.name[0])) || fp.name[0] == '_')) {
            invalid(where, "not a valid identifier");
        }
        if (!declared.insert(fp.name).second) invalid(where, "declared twice");
        if (entry.contains("shape") && entry["shape"] != "triangular") {
            invalid(where + ".shape", "only triangular parameters are supported");
        }
        const json& tri = require(entry, "triangle", where);
        if (!tri.is_array() || tri.size() != 3) invalid(where + ".triangle", "expected [u1, u2, u3]");
        fp.shape = {number(tri[0], where), number(tri[1], where), number(tri[2], where)};
        try {
            check_triangular(fp.shape.u1, fp.shape.u2, fp.shape.u3);
        } catch (const DomainError& e) {
            invalid(where + ".triangle", e.what());
        }
        fp.admissible_range = entry.contains("range") ? pair(entry["range"], where + ".range")
                                                      : Interval{fp.shape.u1, fp.shape.u3};
        if (!fp.admissible_range.contains(Interval{fp.shape.u1, fp.shape.u3})) {
            invalid(where, "support [u1, u3] is not inside the admissible range");
        }
        p.parameters.push_back(std::move(fp));
    }

    const json& pde = require(doc, "pde", "document");
    const json& dim = require(pde, "dimension", "pde");
    if (!dim.is_number_integer() || (dim.get<int>() != 1 && dim.get<int>() != 2)) {
        invalid("pde.dimension", "expected 1 or 2");
    }
    p.dimension = dim.get<int>();
    p.P = expression(require(pde, "P", "pde"), "pde.P");
    p.F = expression(require(pde, "F", "pde"), "pde.F");
    if (p.dimension == 2) {
        p.Q = expression(require(pde, "Q", "pde"), "pde.Q");
    } else if (pde.contains("Q")) {
        invalid("pde.Q", "Q is only allowed when dimension = 2");
    }
    if (pde.contains("orientation")) {
        const json& o = pde["orientation"];
        if (o == "eq2") {
            p.orientation = Orientation::eq2;
        } else if (o == "eq3") {
            p.orientation = Orientation::eq3;
        } else {
            invalid("pde.orientation", "expected \"eq2\" or \"eq3\"");
        }
        if (p.dimension == 1 && p.orientation == Orientation::eq3) invalid("pde.orientation", "eq3 needs dimension 2");
    }
    p.initial = expression(require(doc, "initial", "document"), "initial");

    std::set<std::string> space = declared;
    space.insert("x");
    if (p.dimension == 2) space.insert("y");
    std::set<std::string> space_time = space;
    space_time.insert("t");
    check_symbols(p.P, space, "pde.P");
    if (p.Q) check_symbols(*p.Q, space, "pde.Q");
    check_symbols(p.F, space_time, "pde.F");
    check_symbols(p.initial, space, "initial");

    const json& domain = require(doc, "domain", "document");
    std::set<std::string> open;
    if (domain.contains("open")) {
        if (!domain["open"].is_array()) invalid("domain.open", "expected an array of names");
        for (const json& o : domain["open"]) {
            static const std::set<std::string> known{"t_min", "t_max", "x_min", "x_max", "y_min", "y_max"};
            if (!o.is_string() || !known.contains(o.get<std::string>())) {
                invalid("domain.open", "unknown bound name " + o.dump());
            }
            open.insert(o.get<std::string>());
        }
    }
    auto axis = [&](const char* var, const char* max_key, const char* min_key, const char* count_key) {
        AxisDomain a;
        std::string v(var);
        a.lo = domain.contains(min_key) ? number(domain[min_key], std::string("domain.") + min_key) : 0.0;
        a.hi = number(require(domain, max_key, "domain"), std::string("domain.") + max_key);
        if (!(a.lo < a.hi)) invalid(std::string("domain.") + max_key, "must exceed the lower bound");
        if (domain.contains(count_key)) a.count = count(domain[count_key], std::string("domain.") + count_key);
        a.open_lo = open.contains(v + "_min");
        a.open_hi = open.contains(v + "_max");
        return a;
    };
    p.domain.t = axis("t", "M1", "t_min", "nt");
    if (p.domain.t.lo != 0.0) invalid("domain.t_min", "time starts at the initial plane t = 0");
    p.domain.x = axis("x", "M2", "x_min", "nx");
    if (p.dimension == 2) {
        p.domain.y = axis("y", "M3", "y_min", "ny");
    } else if (open.contains("y_min") || open.contains("y_max")) {
        invalid("domain.open", "y bounds given for a 1D problem");
    }

    if (doc.contains("alpha")) {
        const json& a = doc["alpha"];
        if (a.contains("level_count")) {
            const json& n = a["level_count"];
            if (!n.is_number_integer() || n.get<int>() < 3) invalid("alpha.level_count", "expected an integer >= 3");
            p.alpha_levels = n.get<int>();
        }
    }

    if (doc.contains("oracle")) {
        const json& o = doc["oracle"];
        if (o.contains("G")) {
            p.oracle_G = expression(o["G"], "oracle.G");
            check_symbols(*p.oracle_G, space_time, "oracle.G");
        }
        if (o.contains("ss")) {
            std::set<std::string> ends = space_time;
            for (const std::string& n : declared) {
                ends.insert(n + "_lo");
                ends.insert(n + "_hi");
            }
            SsOracle ss{expression(require(o["ss"], "u1", "oracle.ss"), "oracle.ss.u1"),
                        expression(require(o["ss"], "u2", "oracle.ss"), "oracle.ss.u2")};
            check_symbols(ss.u1, ends, "oracle.ss.u1");
            check_symbols(ss.u2, ends, "oracle.ss.u2");
            p.oracle_ss = std::move(ss);
        }
    }
    if (doc.contains("expect")) p.expect = doc["expect"];
    return p;
}

HeatLikeProblem load_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("problem file not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read problem file: " + path);
    return load_problem(buf.str());
}

json problem_to_json(const HeatLikeProblem& p) {
    json doc;
    if (!p.name.empty()) doc["name"] = p.name;
    json pde{{"dimension", p.dimension}, {"P", ex::to_string(p.P)}, {"F", ex::to_string(p.F)}};
    if (p.Q) {
        pde["Q"] = ex::to_string(*p.Q);
        pde["orientation"] = p.orientation == Orientation::eq2 ? "eq2" : "eq3";
    }
    doc["pde"] = pde;
    doc["initial"] = ex::to_string(p.initial);
    json params = json::array();
    for (const FuzzyParameter& fp : p.parameters) {
        params.push_back({{"name", fp.name},
                          {"triangle", {fp.shape.u1, fp.shape.u2, fp.shape.u3}},
                          {"range", {fp.admissible_range.lo, fp.admissible_range.hi}},
                          {"shape", "triangular"}});
    }
    doc["params"] = params;
    json domain{{"M1", p.domain.t.hi}, {"M2", p.domain.x.hi}, {"x_min", p.domain.x.lo},
                {"nt", p.domain.t.count}, {"nx", p.domain.x.count}};
    json open = json::array();
    auto add_open = [&](const AxisDomain& a, const std::string& v) {
        if (a.open_lo) open.push_back(v + "_min");
        if (a.open_hi) open.push_back(v + "_max");
    };
    add_open(p.domain.t, "t");
    add_open(p.domain.x, "x");
    if (p.domain.y) {
        domain["M3"] = p.domain.y->hi;
        domain["y_min"] = p.domain.y->lo;
        domain["ny"] = p.domain.y->count;
        add_open(*p.domain.y, "y");
    }
    domain["open"] = open;
    doc["domain"] = domain;
    doc["alpha"] = {{"level_count", p.alpha_levels}};
    if (p.oracle_G || p.oracle_ss) {
        json o = json::object();
        if (p.oracle_G) o["G"] = ex::to_string(*p.oracle_G);
        if (p.oracle_ss) o["ss"] = {{"u1", ex::to_string(p.oracle_ss->u1)}, {"u2", ex::to_string(p.oracle_ss->u2)}};
        doc["oracle"] = o;
    }
    if (!p.expect.empty()) doc["expect"] = p.expect;
    return doc;
}

std::string save_problem(const HeatLikeProblem& p) { return problem_to_json(p).dump(2) + "\n"; }

bool structurally_equal(const HeatLikeProblem& a, const HeatLikeProblem& b) {
    auto same_axis = [](const AxisDomain& u, const AxisDomain& v) {
        return u.lo == v.lo && u.hi == v.hi && u.open_lo == v.open_lo && u.open_hi == v.open_hi && u.count == v.count;
    };
    auto same_opt = [](const std::optional<ex::Expression>& u, const std::optional<ex::Expression>& v) {
        if (u.has_value() != v.has_value()) return false;
        return !u || ex::structurally_equal(ex::simplify(*u), ex::simplify(*v));
    };
    auto same = [](const ex::Expression& u, const ex::Expression& v) {
        return ex::structurally_equal(ex::simplify(u), ex::simplify(v));
    };
    if (a.name != b.name || a.dimension != b.dimension || a.orientation != b.orientation ||
        a.alpha_levels != b.alpha_levels || a.parameters.size() != b.parameters.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.parameters.size(); ++i) {
        const auto& u = a.parameters[i];
        const auto& v = b.parameters[i];
        if (u.name != v.name || u.shape.u1 != v.shape.u1 || u.shape.u2 != v.shape.u2 || u.shape.u3 != v.shape.u3 ||
            !(u.admissible_range == v.admissible_range)) {
            return false;
        }
    }
    if (!same_axis(a.domain.t, b.domain.t) || !same_axis(a.domain.x, b.domain.x)) return false;
    if (a.domain.y.has_value() != b.domain.y.has_value()) return false;
    if (a.domain.y && !same_axis(*a.domain.y, *b.domain.y)) return false;
    if (a.oracle_ss.has_value() != b.oracle_ss.has_value()) return false;
    if (a.oracle_ss && !(same(a.oracle_ss->u1, b.oracle_ss->u1) && same(a.oracle_ss->u2, b.oracle_ss->u2))) {
        return false;
    }
    return same(a.P, b.P) && same_opt(a.Q, b.Q) && same(a.F, b.F) && same(a.initial, b.initial) &&
           same_opt(a.oracle_G, b.oracle_G) && a.expect == b.expect;
}

CrispInstance instantiate(const HeatLikeProblem& p, const std::map<std::string, CornerChoice>& selection,
                          double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
    for (const auto& [name, choice] : selection) {
        if (!p.find_parameter(name)) throw UsageError("selection names unknown parameter '" + name + "'");
    }
    CrispInstance inst{&p, {}, alpha};
    for (const FuzzyParameter& fp : p.parameters) {
        auto it = selection.find(fp.name);
        if (it == selection.end()) throw UsageError("no value selected for parameter '" + fp.name + "'");
        Interval cut = fp.cut(alpha);
        double v = 0.0;
        if (const Corner* c = std::get_if<Corner>(&it->second)) {
            v = *c == Corner::lower ? cut.lo : *c == Corner::upper ? cut.hi : fp.shape.u2;
        } else {
            v = std::get<double>(it->second);
            if (!cut.contains(v, kFuzzySlack)) {
                std::ostringstream os;
                os.precision(12);
                os << "value " << v << " for '" << fp.name << "' lies outside its alpha-cut [" << cut.lo << ", "
                   << cut.hi << "] at alpha=" << alpha;
                throw DomainError(os.str());
            }
        }
        inst.bindings.set(fp.name, v);
    }
    return inst;
}

CrispInstance instantiate(const HeatLikeProblem& p, Corner all, double alpha) {
    std::map<std::string, CornerChoice> sel;
    for (const FuzzyParameter& fp : p.parameters) sel[fp.name] = all;
    return instantiate(p, sel, alpha);
}

GridSpec make_grid(const HeatLikeProblem& p, const GridOverrides& overrides) {
    CrispInstance core = instantiate(p, Corner::peak, 1.0);
    std::vector<const ex::Expression*> fields{&p.P, &p.F, &p.initial};
    if (p.Q) fields.push_back(&*p.Q);

    // Probe a boundary plane at a few interior points of the other axes.
    auto singular_at = [&](const char* var, double value) {
        for (int k = 1; k <= 3; ++k) {
            ex::Environment env = core.bindings;
            env.set("t", p.domain.t.hi * k / 4.0);
            env.set("x", p.domain.x.lo + (p.domain.x.hi - p.domain.x.lo) * k / 4.0);
            if (p.domain.y) env.set("y", p.domain.y->lo + (p.domain.y->hi - p.domain.y->lo) * k / 4.0);
            env.set(var, value);
            for (const ex::Expression* e : fields) {
                try {
                    if (!std::isfinite(ex::evaluate(*e, env))) return true;
                } catch (const EvaluationError&) {
                    return true;
                }
            }
        }
        return false;
    };
    auto make_axis = [&](const AxisDomain& d, std::optional<std::size_t> n, const char* var) {
        Axis a{d.lo, d.hi, n.value_or(d.count)};
        if (a.count < 3) throw UsageError(std::string("grid count for ") + var + " must be at least 3");
        double h = (d.hi - d.lo) / static_cast<double>(a.count - 1);
        if (var[0] != 't') {
            if (d.open_lo && singular_at(var, d.lo)) a.lo = d.lo + h;
            if (d.open_hi && singular_at(var, d.hi)) a.hi = d.hi - h;
        }
        return a;
    };
    GridSpec g;
    g.t = make_axis(p.domain.t, overrides.nt, "t");
    g.x = make_axis(p.domain.x, overrides.nx, "x");
    if (p.domain.y) g.y = make_axis(*p.domain.y, overrides.ny, "y");
    g.validate();
    return g;
}

}  // namespace fuzzyheat
