#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpnv {

// Exact rational color value. Integer theories only ever produce den == 1.
class value {
public:
    value() = default;
    value(std::int64_t n) : num_(n) {}  // NOLINT: implicit from integers is intended
    value(std::int64_t n, std::int64_t d);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    bool is_integer() const { return den_ == 1; }

    friend value operator+(const value& a, const value& b);
    friend value operator-(const value& a, const value& b);
    friend value operator*(const value& a, const value& b);
    friend value operator-(const value& a) { return value(-a.num_, a.den_); }
    friend bool operator==(const value& a, const value& b) = default;
    friend std::strong_ordering operator<=>(const value& a, const value& b);

    std::string to_string() const;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

enum class domain_kind { integer, real, finite_enum };

struct symbol_decl {
    std::string name;
    int arity = 0;
    friend bool operator==(const symbol_decl&, const symbol_decl&) = default;
};

// Descriptor of the color logic FO(C, Omega, Xi) a net or formula is written in.
struct color_theory {
    std::string name;
    domain_kind domain = domain_kind::integer;
    std::vector<value> enum_values;  // finite_enum only
    std::vector<symbol_decl> operations;
    std::vector<symbol_decl> predicates;
    std::string smt_logic;
    std::vector<symbol_decl> uninterpreted_functions;

    const symbol_decl* find_operation(std::string_view symbol) const;
    const symbol_decl* find_predicate(std::string_view symbol) const;
    bool is_uninterpreted(std::string_view symbol) const;
    bool admits_literal(const value& v) const;

    // Returns a copy with extra uninterpreted functions; throws on symbol clashes.
    color_theory with_functions(const std::vector<symbol_decl>& functions) const;
};

std::vector<color_theory> declare_builtin_theories();
std::optional<color_theory> find_builtin_theory(std::string_view name);

// ---------------------------------------------------------------------------
// Color terms and atoms

struct color_term_node;
using color_term = std::shared_ptr<const color_term_node>;

struct color_term_node {
    enum class kind { var, token_color, apply, literal };

    kind k;
    std::string name;     // color var, token var (token_color) or operation symbol
    int index = 0;        // color index (1-based) for token_color
    std::vector<color_term> args;
    value lit;
};

color_term make_color_var(std::string name);
color_term make_token_color(int k, std::string token_var);
color_term make_apply(std::string op, std::vector<color_term> args);
color_term make_literal(value v);

bool structurally_equal(const color_term& a, const color_term& b);

struct color_atom {
    std::string predicate;
    std::vector<color_term> args;
};

bool structurally_equal(const color_atom& a, const color_atom& b);

// Well-formedness: every symbol declared with the right arity, every color
// index within 1..n_colors, literals admitted by the domain. Throws cpnv_error.
void check_term(const color_theory& theory, const color_term& t, int n_colors);
void check_atom(const color_theory& theory, const color_atom& a, int n_colors);

// Interpretation of uninterpreted functions, used only by the explicit oracle.
using function_table = std::map<std::string, std::function<value(std::span<const value>)>>;

// Built-in semantics of operations/predicates; nullopt if the symbol is not built in.
std::optional<value> apply_builtin_operation(std::string_view op, std::span<const value> args);
std::optional<bool> apply_builtin_predicate(std::string_view pred, std::span<const value> args);

std::string to_string(const color_term& t);
std::string to_string(const color_atom& a);

}  // namespace cpnv
