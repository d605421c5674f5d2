#include "cpnv/color_theory.hpp"

#include "cpnv/errors.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace cpnv {

std::string_view to_string(error_kind kind) {
    switch (kind) {
    case error_kind::syntax_error: return "SyntaxError";
    case error_kind::undeclared_symbol: return "UndeclaredSymbol";
    case error_kind::undeclared_place: return "UndeclaredPlace";
    case error_kind::color_index_out_of_range: return "ColorIndexOutOfRange";
    case error_kind::arity_mismatch: return "ArityMismatch";
    case error_kind::free_variable: return "FreeVariable";
    case error_kind::not_special_form: return "NotSpecialForm";
    case error_kind::variable_clash: return "VariableClash";
    case error_kind::fragment_unsupported: return "FragmentUnsupported";
    case error_kind::oracle_unsupported: return "OracleUnsupported";
    case error_kind::guard_free_var_mismatch: return "GuardFreeVarMismatch";
    case error_kind::rhs_var_misuse: return "RhsVarMisuse";
    case error_kind::guard_fragment_too_high: return "GuardFragmentTooHigh";
    case error_kind::unsupported_construct: return "UnsupportedConstruct";
    case error_kind::spawn_failure: return "SpawnFailure";
    case error_kind::protocol_error: return "ProtocolError";
    case error_kind::solver_failure: return "SolverFailure";
    case error_kind::budget_exceeded: return "BudgetExceeded";
    case error_kind::invalid_argument: return "InvalidArgument";
    }
    return "Error";
}

// ---------------------------------------------------------------------------
// value

namespace {

std::int64_t checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN)
        throw cpnv_error(error_kind::invalid_argument, "color value overflow");
    return static_cast<std::int64_t>(v);
}

value make_normalized(__int128 n, __int128 d) {
    if (d == 0)
        throw cpnv_error(error_kind::invalid_argument, "zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        n /= a;
        d /= a;
    }
    return value(checked(n), checked(d));
}

}  // namespace

value::value(std::int64_t n, std::int64_t d) {
    if (d == 0)
        throw cpnv_error(error_kind::invalid_argument, "zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    num_ = n;
    den_ = d;
}

value operator+(const value& a, const value& b) {
    return make_normalized(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                           static_cast<__int128>(a.den_) * b.den_);
}

value operator-(const value& a, const value& b) { return a + (-b); }

value operator*(const value& a, const value& b) {
    return make_normalized(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

std::strong_ordering operator<=>(const value& a, const value& b) {
    __int128 l = static_cast<__int128>(a.num_) * b.den_;
    __int128 r = static_cast<__int128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string value::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

// ---------------------------------------------------------------------------
// theories

namespace {

const symbol_decl* find_decl(const std::vector<symbol_decl>& decls, std::string_view symbol) {
    auto it = std::find_if(decls.begin(), decls.end(), [&](const symbol_decl& d) { return d.name == symbol; });
    return it == decls.end() ? nullptr : &*it;
}

std::vector<symbol_decl> comparison_predicates() {
    return {{"=", 2}, {"!=", 2}, {"<", 2}, {"<=", 2}, {">", 2}, {">=", 2}};
}

}  // namespace

const symbol_decl* color_theory::find_operation(std::string_view symbol) const {
    if (auto d = find_decl(operations, symbol)) return d;
    return find_decl(uninterpreted_functions, symbol);
}

const symbol_decl* color_theory::find_predicate(std::string_view symbol) const {
    return find_decl(predicates, symbol);
}

bool color_theory::is_uninterpreted(std::string_view symbol) const {
    return find_decl(uninterpreted_functions, symbol) != nullptr;
}

bool color_theory::admits_literal(const value& v) const {
    switch (domain) {
    case domain_kind::integer: return v.is_integer();
    case domain_kind::real: return true;
    case domain_kind::finite_enum:
        return std::find(enum_values.begin(), enum_values.end(), v) != enum_values.end();
    }
    return false;
}

color_theory color_theory::with_functions(const std::vector<symbol_decl>& functions) const {
    color_theory out = *this;
    for (const auto& f : functions) {
        if (out.find_operation(f.name) || out.find_predicate(f.name))
            throw cpnv_error(error_kind::invalid_argument, "symbol '" + f.name + "' declared twice");
        out.uninterpreted_functions.push_back(f);
    }
    return out;
}

std::vector<color_theory> declare_builtin_theories() {
    std::vector<color_theory> out;

    color_theory idl;
    idl.name = "idl";
    idl.domain = domain_kind::integer;
    idl.operations = {{"+", 2}, {"-", 2}};
    idl.predicates = comparison_predicates();
    idl.smt_logic = "QF_IDL";
    out.push_back(idl);

    color_theory lia;
    lia.name = "lia";
    lia.domain = domain_kind::integer;
    lia.operations = {{"+", 2}, {"-", 2}, {"*", 2}};
    lia.predicates = comparison_predicates();
    lia.smt_logic = "QF_LIA";
    out.push_back(lia);

    color_theory lra;
    lra.name = "lra";
    lra.domain = domain_kind::real;
    lra.operations = {{"+", 2}, {"-", 2}, {"*", 2}};
    lra.predicates = comparison_predicates();
    lra.smt_logic = "QF_LRA";
    out.push_back(lra);

    // Testing theory: a three-element ordered domain the explicit oracle can
    // enumerate exhaustively.
    color_theory enum3;
    enum3.name = "enum3";
    enum3.domain = domain_kind::finite_enum;
    enum3.enum_values = {0, 1, 2};
    enum3.predicates = comparison_predicates();
    enum3.smt_logic = "QF_LIA";
    out.push_back(enum3);

    return out;
}

std::optional<color_theory> find_builtin_theory(std::string_view name) {
    for (auto& t : declare_builtin_theories())
        if (t.name == name) return t;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// terms

color_term make_color_var(std::string name) {
    return std::make_shared<const color_term_node>(
        color_term_node{color_term_node::kind::var, std::move(name), 0, {}, {}});
}

color_term make_token_color(int k, std::string token_var) {
    return std::make_shared<const color_term_node>(
        color_term_node{color_term_node::kind::token_color, std::move(token_var), k, {}, {}});
}

color_term make_apply(std::string op, std::vector<color_term> args) {
    return std::make_shared<const color_term_node>(
        color_term_node{color_term_node::kind::apply, std::move(op), 0, std::move(args), {}});
}

color_term make_literal(value v) {
    return std::make_shared<const color_term_node>(color_term_node{color_term_node::kind::literal, {}, 0, {}, v});
}

bool structurally_equal(const color_term& a, const color_term& b) {
    if (a == b) return true;
    if (a->k != b->k || a->name != b->name || a->index != b->index || a->args.size() != b->args.size())
        return false;
    if (a->k == color_term_node::kind::literal && a->lit != b->lit) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!structurally_equal(a->args[i], b->args[i])) return false;
    return true;
}

bool structurally_equal(const color_atom& a, const color_atom& b) {
    if (a.predicate != b.predicate || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structurally_equal(a.args[i], b.args[i])) return false;
    return true;
}

void check_term(const color_theory& theory, const color_term& t, int n_colors) {
    switch (t->k) {
    case color_term_node::kind::var:
        return;
    case color_term_node::kind::token_color:
        if (t->index < 1 || t->index > n_colors)
            throw cpnv_error(error_kind::color_index_out_of_range,
                             "d" + std::to_string(t->index) + "(" + t->name + ") with " +
                                 std::to_string(n_colors) + " color(s)");
        return;
    case color_term_node::kind::literal:
        if (!theory.admits_literal(t->lit))
            throw cpnv_error(error_kind::undeclared_symbol,
                             "literal " + t->lit.to_string() + " is outside the domain of theory " + theory.name);
        return;
    case color_term_node::kind::apply: {
        const symbol_decl* decl = theory.find_operation(t->name);
        if (!decl)
            throw cpnv_error(error_kind::undeclared_symbol, "operation '" + t->name + "' in theory " + theory.name);
        if (decl->arity != static_cast<int>(t->args.size()))
            throw cpnv_error(error_kind::arity_mismatch, "'" + t->name + "' expects " +
                                                             std::to_string(decl->arity) + " argument(s)");
        for (const auto& a : t->args) check_term(theory, a, n_colors);
        return;
    }
    }
}

void check_atom(const color_theory& theory, const color_atom& a, int n_colors) {
    const symbol_decl* decl = theory.find_predicate(a.predicate);
    if (!decl)
        throw cpnv_error(error_kind::undeclared_symbol, "predicate '" + a.predicate + "' in theory " + theory.name);
    if (decl->arity != static_cast<int>(a.args.size()))
        throw cpnv_error(error_kind::arity_mismatch,
                         "'" + a.predicate + "' expects " + std::to_string(decl->arity) + " argument(s)");
    for (const auto& t : a.args) check_term(theory, t, n_colors);
}

std::optional<value> apply_builtin_operation(std::string_view op, std::span<const value> args) {
    if (args.size() != 2) return std::nullopt;
    if (op == "+") return args[0] + args[1];
    if (op == "-") return args[0] - args[1];
    if (op == "*") return args[0] * args[1];
    return std::nullopt;
}

std::optional<bool> apply_builtin_predicate(std::string_view pred, std::span<const value> args) {
    if (args.size() != 2) return std::nullopt;
    const value& a = args[0];
    const value& b = args[1];
    if (pred == "=") return a == b;
    if (pred == "!=") return a != b;
    if (pred == "<") return a < b;
    if (pred == "<=") return a <= b;
    if (pred == ">") return a > b;
    if (pred == ">=") return a >= b;
    return std::nullopt;
}

namespace {

bool is_infix_op(std::string_view op) { return op == "+" || op == "-" || op == "*"; }
bool is_infix_pred(std::string_view p) {
    return p == "=" || p == "!=" || p == "<" || p == "<=" || p == ">" || p == ">=";
}

}  // namespace

std::string to_string(const color_term& t) {
    switch (t->k) {
    case color_term_node::kind::var: return t->name;
    case color_term_node::kind::token_color: return "d" + std::to_string(t->index) + "(" + t->name + ")";
    case color_term_node::kind::literal: return t->lit.to_string();
    case color_term_node::kind::apply: {
        if (is_infix_op(t->name) && t->args.size() == 2)
            return "(" + to_string(t->args[0]) + " " + t->name + " " + to_string(t->args[1]) + ")";
        std::string s = t->name + "(";
        for (std::size_t i = 0; i < t->args.size(); ++i) {
            if (i) s += ", ";
            s += to_string(t->args[i]);
        }
        return s + ")";
    }
    }
    return {};
}

std::string to_string(const color_atom& a) {
    if (is_infix_pred(a.predicate) && a.args.size() == 2)
        return to_string(a.args[0]) + " " + a.predicate + " " + to_string(a.args[1]);
    std::string s = a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(a.args[i]);
    }
    return s + ")";
}

}  // namespace cpnv
