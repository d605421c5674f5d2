#pragma once

#include "cpnv/color_theory.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace cpnv {

// Name of the inactive place. Never accepted from user input; it only appears
// as a guard produced by the special-form transformation.
inline const std::string bottom_place = "_bot_";

enum class var_sort { token, color };

struct formula_node;
using formula = std::shared_ptr<const formula_node>;

// CML formula. And/Or are n-ary and Forall/False are kept as first-class nodes
// so rewrites do not have to rediscover them under negations; Implies and Iff
// are desugared by the constructors.
struct formula_node {
    enum class kind { tt, ff, token_eq, place, pred, not_, and_, or_, exists, forall };

    kind k;
    std::string var;    // token_eq lhs, place atom token, quantified variable
    std::string var2;   // token_eq rhs
    std::string place;  // place atom place; quantifier guard ("" when unguarded)
    var_sort sort = var_sort::token;
    color_atom atom;
    std::vector<formula> kids;

    bool is_quantifier() const { return k == kind::exists || k == kind::forall; }
    bool is_guarded() const { return is_quantifier() && sort == var_sort::token && !place.empty(); }
};

using fk = formula_node::kind;

formula mk_true();
formula mk_false();
formula mk_bool(bool b);
formula mk_token_eq(std::string x, std::string y);
formula mk_place(std::string place, std::string x);
formula mk_pred(color_atom atom);
formula mk_pred(std::string predicate, std::vector<color_term> args);
formula mk_not(formula f);
formula mk_and(std::vector<formula> kids);
formula mk_or(std::vector<formula> kids);
formula mk_and(formula a, formula b);
formula mk_or(formula a, formula b);
formula mk_implies(formula a, formula b);
formula mk_iff(formula a, formula b);
formula mk_exists_token(std::string x, formula body);
formula mk_exists_token_in(std::string x, std::string place, formula body);
formula mk_forall_token(std::string x, formula body);
formula mk_forall_token_in(std::string x, std::string place, formula body);
formula mk_exists_color(std::string z, formula body);
formula mk_forall_color(std::string z, formula body);
formula mk_quantifier(fk k, var_sort sort, std::string var, std::string guard, formula body);

// Same node with different children (quantifiers keep their binder).
formula with_kids(const formula& f, std::vector<formula> kids);

struct variable_sets {
    std::set<std::string> tokens;
    std::set<std::string> colors;
    bool empty() const { return tokens.empty() && colors.empty(); }
    friend bool operator==(const variable_sets&, const variable_sets&) = default;
};

variable_sets free_vars(const formula& f);
variable_sets bound_vars(const formula& f);
std::set<std::string> free_color_vars(const color_term& t);
std::set<std::string> token_vars_of(const color_term& t);
bool is_closed(const formula& f);
bool occurs_free(const formula& f, const std::string& var);

// Places named by atoms and guards (including the inactive place when present).
std::set<std::string> places_of(const formula& f);

std::size_t formula_size(const formula& f);
int quantifier_count(const formula& f);

// Fresh-name supply; names handed out never collide with reserved ones.
class name_supply {
public:
    name_supply() = default;
    explicit name_supply(std::set<std::string> reserved) : used_(std::move(reserved)) {}

    void reserve(const std::string& name) { used_.insert(name); }
    void reserve(const formula& f);
    std::string fresh(const std::string& base);

private:
    std::set<std::string> used_;
    std::map<std::string, int> counters_;
};

// Substitutes token variable `from` by `to` in free positions (atoms, equalities,
// color terms). Binders that would capture `to` are renamed.
formula substitute_token(const formula& f, const std::string& from, const std::string& to);

// Replaces d_k(x) terms according to `replacement`, keyed by (token var, k).
using color_replacement = std::map<std::pair<std::string, int>, color_term>;
formula substitute_token_colors(const formula& f, const color_replacement& replacement);
color_term substitute_token_colors(const color_term& t, const color_replacement& replacement);
color_atom substitute_token_colors(const color_atom& a, const color_replacement& replacement);

// Replaces place atoms p(x) of free token variable x by a constant.
formula substitute_place_atoms(const formula& f, const std::map<std::string, std::string>& location);

// Renames every bound variable to a fresh name from `names`, so that each
// variable is bound exactly once and no bound name clashes with a free one.
formula rename_apart(const formula& f, name_supply& names);

std::string to_string(const formula& f);

// Canonical rendering modulo bound-variable names, associativity/commutativity
// of and/or, and negation placement.
std::string canonical_string(const formula& f);
bool alpha_ac_equal(const formula& a, const formula& b);

}  // namespace cpnv
