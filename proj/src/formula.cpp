#include "cpnv/formula.hpp"

#include "cpnv/errors.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>

namespace cpnv {

namespace {

formula make(formula_node n) { return std::make_shared<const formula_node>(std::move(n)); }

const formula& true_node() {
    static const formula t = make(formula_node{fk::tt, {}, {}, {}, var_sort::token, {}, {}});
    return t;
}

const formula& false_node() {
    static const formula f = make(formula_node{fk::ff, {}, {}, {}, var_sort::token, {}, {}});
    return f;
}

}  // namespace

formula mk_true() { return true_node(); }
formula mk_false() { return false_node(); }
formula mk_bool(bool b) { return b ? mk_true() : mk_false(); }

formula mk_token_eq(std::string x, std::string y) {
    return make(formula_node{fk::token_eq, std::move(x), std::move(y), {}, var_sort::token, {}, {}});
}

formula mk_place(std::string place, std::string x) {
    return make(formula_node{fk::place, std::move(x), {}, std::move(place), var_sort::token, {}, {}});
}

formula mk_pred(color_atom atom) {
    return make(formula_node{fk::pred, {}, {}, {}, var_sort::color, std::move(atom), {}});
}

formula mk_pred(std::string predicate, std::vector<color_term> args) {
    return mk_pred(color_atom{std::move(predicate), std::move(args)});
}

formula mk_not(formula f) { return make(formula_node{fk::not_, {}, {}, {}, var_sort::token, {}, {std::move(f)}}); }

formula mk_and(std::vector<formula> kids) {
    if (kids.empty()) return mk_true();
    if (kids.size() == 1) return kids.front();
    return make(formula_node{fk::and_, {}, {}, {}, var_sort::token, {}, std::move(kids)});
}

formula mk_or(std::vector<formula> kids) {
    if (kids.empty()) return mk_false();
    if (kids.size() == 1) return kids.front();
    return make(formula_node{fk::or_, {}, {}, {}, var_sort::token, {}, std::move(kids)});
}

formula mk_and(formula a, formula b) { return mk_and(std::vector<formula>{std::move(a), std::move(b)}); }
formula mk_or(formula a, formula b) { return mk_or(std::vector<formula>{std::move(a), std::move(b)}); }
formula mk_implies(formula a, formula b) { return mk_or(mk_not(std::move(a)), std::move(b)); }

formula mk_iff(formula a, formula b) {
    return mk_and(mk_or(mk_not(a), b), mk_or(a, mk_not(b)));
}

formula mk_quantifier(fk k, var_sort sort, std::string var, std::string guard, formula body) {
    return make(formula_node{k, std::move(var), {}, std::move(guard), sort, {}, {std::move(body)}});
}

formula mk_exists_token(std::string x, formula body) {
    return mk_quantifier(fk::exists, var_sort::token, std::move(x), {}, std::move(body));
}
formula mk_exists_token_in(std::string x, std::string place, formula body) {
    return mk_quantifier(fk::exists, var_sort::token, std::move(x), std::move(place), std::move(body));
}
formula mk_forall_token(std::string x, formula body) {
    return mk_quantifier(fk::forall, var_sort::token, std::move(x), {}, std::move(body));
}
formula mk_forall_token_in(std::string x, std::string place, formula body) {
    return mk_quantifier(fk::forall, var_sort::token, std::move(x), std::move(place), std::move(body));
}
formula mk_exists_color(std::string z, formula body) {
    return mk_quantifier(fk::exists, var_sort::color, std::move(z), {}, std::move(body));
}
formula mk_forall_color(std::string z, formula body) {
    return mk_quantifier(fk::forall, var_sort::color, std::move(z), {}, std::move(body));
}

formula with_kids(const formula& f, std::vector<formula> kids) {
    switch (f->k) {
    case fk::and_: return mk_and(std::move(kids));
    case fk::or_: return mk_or(std::move(kids));
    default: {
        formula_node n = *f;
        n.kids = std::move(kids);
        return make(std::move(n));
    }
    }
}

// ---------------------------------------------------------------------------
// variables

std::set<std::string> free_color_vars(const color_term& t) {
    std::set<std::string> out;
    std::function<void(const color_term&)> walk = [&](const color_term& u) {
        if (u->k == color_term_node::kind::var) out.insert(u->name);
        for (const auto& a : u->args) walk(a);
    };
    walk(t);
    return out;
}

std::set<std::string> token_vars_of(const color_term& t) {
    std::set<std::string> out;
    std::function<void(const color_term&)> walk = [&](const color_term& u) {
        if (u->k == color_term_node::kind::token_color) out.insert(u->name);
        for (const auto& a : u->args) walk(a);
    };
    walk(t);
    return out;
}

namespace {

void collect_free(const formula& f, std::set<std::string>& bound_tokens, std::set<std::string>& bound_colors,
                  variable_sets& out) {
    auto add_token = [&](const std::string& x) {
        if (!bound_tokens.count(x)) out.tokens.insert(x);
    };
    switch (f->k) {
    case fk::tt:
    case fk::ff: return;
    case fk::token_eq:
        add_token(f->var);
        add_token(f->var2);
        return;
    case fk::place: add_token(f->var); return;
    case fk::pred:
        for (const auto& t : f->atom.args) {
            for (const auto& x : token_vars_of(t)) add_token(x);
            for (const auto& z : free_color_vars(t))
                if (!bound_colors.count(z)) out.colors.insert(z);
        }
        return;
    case fk::exists:
    case fk::forall: {
        auto& scope = f->sort == var_sort::token ? bound_tokens : bound_colors;
        bool inserted = scope.insert(f->var).second;
        collect_free(f->kids[0], bound_tokens, bound_colors, out);
        if (inserted) scope.erase(f->var);
        return;
    }
    default:
        for (const auto& k : f->kids) collect_free(k, bound_tokens, bound_colors, out);
    }
}

}  // namespace

variable_sets free_vars(const formula& f) {
    variable_sets out;
    std::set<std::string> bt, bc;
    collect_free(f, bt, bc, out);
    return out;
}

variable_sets bound_vars(const formula& f) {
    variable_sets out;
    std::function<void(const formula&)> walk = [&](const formula& g) {
        if (g->is_quantifier()) (g->sort == var_sort::token ? out.tokens : out.colors).insert(g->var);
        for (const auto& k : g->kids) walk(k);
    };
    walk(f);
    return out;
}

bool is_closed(const formula& f) { return free_vars(f).empty(); }

bool occurs_free(const formula& f, const std::string& var) {
    auto fv = free_vars(f);
    return fv.tokens.count(var) || fv.colors.count(var);
}

std::set<std::string> places_of(const formula& f) {
    std::set<std::string> out;
    std::function<void(const formula&)> walk = [&](const formula& g) {
        if (g->k == fk::place || g->is_guarded()) out.insert(g->place);
        for (const auto& k : g->kids) walk(k);
    };
    walk(f);
    return out;
}

std::size_t formula_size(const formula& f) {
    std::size_t n = 1;
    for (const auto& k : f->kids) n += formula_size(k);
    return n;
}

int quantifier_count(const formula& f) {
    int n = f->is_quantifier() ? 1 : 0;
    for (const auto& k : f->kids) n += quantifier_count(k);
    return n;
}

// ---------------------------------------------------------------------------
// names

namespace {

std::string strip_suffix(const std::string& base) {
    auto pos = base.find_last_of('_');
    if (pos == std::string::npos || pos == 0 || pos + 1 == base.size()) return base;
    for (std::size_t i = pos + 1; i < base.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(base[i]))) return base;
    return base.substr(0, pos);
}

void all_names(const formula& f, std::set<std::string>& out) {
    auto fv = free_vars(f);
    auto bv = bound_vars(f);
    out.insert(fv.tokens.begin(), fv.tokens.end());
    out.insert(fv.colors.begin(), fv.colors.end());
    out.insert(bv.tokens.begin(), bv.tokens.end());
    out.insert(bv.colors.begin(), bv.colors.end());
}

}  // namespace

void name_supply::reserve(const formula& f) { all_names(f, used_); }

std::string name_supply::fresh(const std::string& base) {
    if (used_.insert(base).second) return base;
    std::string stem = strip_suffix(base);
    int& counter = counters_[stem];
    for (;;) {
        std::string candidate = stem + "_" + std::to_string(++counter);
        if (used_.insert(candidate).second) return candidate;
    }
}

// ---------------------------------------------------------------------------
// substitution

namespace {

color_term rename_token_in_term(const color_term& t, const std::string& from, const std::string& to) {
    switch (t->k) {
    case color_term_node::kind::token_color:
        return t->name == from ? make_token_color(t->index, to) : t;
    case color_term_node::kind::apply: {
        std::vector<color_term> args;
        bool changed = false;
        for (const auto& a : t->args) {
            args.push_back(rename_token_in_term(a, from, to));
            changed |= args.back() != a;
        }
        return changed ? make_apply(t->name, std::move(args)) : t;
    }
    default: return t;
    }
}

color_term rename_color_in_term(const color_term& t, const std::string& from, const std::string& to) {
    switch (t->k) {
    case color_term_node::kind::var: return t->name == from ? make_color_var(to) : t;
    case color_term_node::kind::apply: {
        std::vector<color_term> args;
        for (const auto& a : t->args) args.push_back(rename_color_in_term(a, from, to));
        return make_apply(t->name, std::move(args));
    }
    default: return t;
    }
}

// Renames free occurrences of a variable of the given sort; no capture checks.
formula rename_free(const formula& f, var_sort sort, const std::string& from, const std::string& to) {
    switch (f->k) {
    case fk::tt:
    case fk::ff: return f;
    case fk::token_eq:
        if (sort != var_sort::token || (f->var != from && f->var2 != from)) return f;
        return mk_token_eq(f->var == from ? to : f->var, f->var2 == from ? to : f->var2);
    case fk::place:
        if (sort != var_sort::token || f->var != from) return f;
        return mk_place(f->place, to);
    case fk::pred: {
        color_atom a{f->atom.predicate, {}};
        for (const auto& t : f->atom.args)
            a.args.push_back(sort == var_sort::token ? rename_token_in_term(t, from, to)
                                                     : rename_color_in_term(t, from, to));
        return mk_pred(std::move(a));
    }
    case fk::exists:
    case fk::forall:
        if (f->sort == sort && f->var == from) return f;
        return with_kids(f, {rename_free(f->kids[0], sort, from, to)});
    default: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(rename_free(k, sort, from, to));
        return with_kids(f, std::move(kids));
    }
    }
}

formula substitute_token_impl(const formula& f, const std::string& from, const std::string& to,
                              name_supply& names) {
    switch (f->k) {
    case fk::exists:
    case fk::forall: {
        if (f->sort == var_sort::token && f->var == from) return f;
        if (f->var == to && occurs_free(f->kids[0], from)) {
            std::string renamed = names.fresh(f->var);
            formula body = rename_free(f->kids[0], f->sort, f->var, renamed);
            return mk_quantifier(f->k, f->sort, renamed, f->place, substitute_token_impl(body, from, to, names));
        }
        return with_kids(f, {substitute_token_impl(f->kids[0], from, to, names)});
    }
    case fk::not_:
    case fk::and_:
    case fk::or_: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(substitute_token_impl(k, from, to, names));
        return with_kids(f, std::move(kids));
    }
    default: return rename_free(f, var_sort::token, from, to);
    }
}

}  // namespace

formula substitute_token(const formula& f, const std::string& from, const std::string& to) {
    if (from == to) return f;
    name_supply names;
    names.reserve(f);
    names.reserve(to);
    return substitute_token_impl(f, from, to, names);
}

color_term substitute_token_colors(const color_term& t, const color_replacement& replacement) {
    switch (t->k) {
    case color_term_node::kind::token_color: {
        auto it = replacement.find({t->name, t->index});
        return it == replacement.end() ? t : it->second;
    }
    case color_term_node::kind::apply: {
        std::vector<color_term> args;
        bool changed = false;
        for (const auto& a : t->args) {
            args.push_back(substitute_token_colors(a, replacement));
            changed |= args.back() != a;
        }
        return changed ? make_apply(t->name, std::move(args)) : t;
    }
    default: return t;
    }
}

color_atom substitute_token_colors(const color_atom& a, const color_replacement& replacement) {
    color_atom out{a.predicate, {}};
    for (const auto& t : a.args) out.args.push_back(substitute_token_colors(t, replacement));
    return out;
}

formula substitute_token_colors(const formula& f, const color_replacement& replacement) {
    if (replacement.empty()) return f;
    switch (f->k) {
    case fk::pred: return mk_pred(substitute_token_colors(f->atom, replacement));
    case fk::exists:
    case fk::forall: {
        if (f->sort == var_sort::token) {
            bool shadows = std::any_of(replacement.begin(), replacement.end(),
                                       [&](const auto& e) { return e.first.first == f->var; });
            if (shadows) {
                color_replacement inner;
                for (const auto& e : replacement)
                    if (e.first.first != f->var) inner.insert(e);
                return with_kids(f, {substitute_token_colors(f->kids[0], inner)});
            }
        }
        return with_kids(f, {substitute_token_colors(f->kids[0], replacement)});
    }
    case fk::not_:
    case fk::and_:
    case fk::or_: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(substitute_token_colors(k, replacement));
        return with_kids(f, std::move(kids));
    }
    default: return f;
    }
}

formula substitute_place_atoms(const formula& f, const std::map<std::string, std::string>& location) {
    if (location.empty()) return f;
    switch (f->k) {
    case fk::place: {
        auto it = location.find(f->var);
        if (it == location.end()) return f;
        return mk_bool(it->second == f->place);
    }
    case fk::exists:
    case fk::forall: {
        if (f->sort == var_sort::token && location.count(f->var)) {
            auto inner = location;
            inner.erase(f->var);
            return with_kids(f, {substitute_place_atoms(f->kids[0], inner)});
        }
        return with_kids(f, {substitute_place_atoms(f->kids[0], location)});
    }
    case fk::not_:
    case fk::and_:
    case fk::or_: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(substitute_place_atoms(k, location));
        return with_kids(f, std::move(kids));
    }
    default: return f;
    }
}

namespace {

formula rename_apart_impl(const formula& f, name_supply& names, std::map<std::string, std::string>& tok,
                          std::map<std::string, std::string>& col) {
    auto tr = [](const std::map<std::string, std::string>& m, const std::string& v) {
        auto it = m.find(v);
        return it == m.end() ? v : it->second;
    };
    switch (f->k) {
    case fk::tt:
    case fk::ff: return f;
    case fk::token_eq: return mk_token_eq(tr(tok, f->var), tr(tok, f->var2));
    case fk::place: return mk_place(f->place, tr(tok, f->var));
    case fk::pred: {
        std::function<color_term(const color_term&)> walk = [&](const color_term& t) -> color_term {
            switch (t->k) {
            case color_term_node::kind::var: return make_color_var(tr(col, t->name));
            case color_term_node::kind::token_color: return make_token_color(t->index, tr(tok, t->name));
            case color_term_node::kind::apply: {
                std::vector<color_term> args;
                for (const auto& a : t->args) args.push_back(walk(a));
                return make_apply(t->name, std::move(args));
            }
            default: return t;
            }
        };
        color_atom a{f->atom.predicate, {}};
        for (const auto& t : f->atom.args) a.args.push_back(walk(t));
        return mk_pred(std::move(a));
    }
    case fk::exists:
    case fk::forall: {
        auto& scope = f->sort == var_sort::token ? tok : col;
        std::string fresh = names.fresh(f->var);
        auto saved = scope.find(f->var) == scope.end() ? std::optional<std::string>{}
                                                       : std::optional<std::string>{scope[f->var]};
        scope[f->var] = fresh;
        formula body = rename_apart_impl(f->kids[0], names, tok, col);
        if (saved)
            scope[f->var] = *saved;
        else
            scope.erase(f->var);
        return mk_quantifier(f->k, f->sort, fresh, f->place, body);
    }
    default: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(rename_apart_impl(k, names, tok, col));
        return with_kids(f, std::move(kids));
    }
    }
}

}  // namespace

formula rename_apart(const formula& f, name_supply& names) {
    auto fv = free_vars(f);
    for (const auto& v : fv.tokens) names.reserve(v);
    for (const auto& v : fv.colors) names.reserve(v);
    std::map<std::string, std::string> tok, col;
    return rename_apart_impl(f, names, tok, col);
}

// ---------------------------------------------------------------------------
// printing

namespace {

int precedence(const formula& f) {
    switch (f->k) {
    case fk::exists:
    case fk::forall: return 0;
    case fk::or_: return 3;
    case fk::and_: return 4;
    case fk::not_: return 5;
    default: return 6;
    }
}

std::string print(const formula& f, int context);

std::string print_quantifier(const formula& f) {
    // Merge runs of the same quantifier, sort and guard: "forall x, y in p . body".
    std::string head = f->k == fk::exists ? "exists " : "forall ";
    if (f->sort == var_sort::color) head += "color ";
    std::vector<std::string> vars{f->var};
    formula body = f->kids[0];
    while (body->k == f->k && body->sort == f->sort && body->place == f->place) {
        vars.push_back(body->var);
        body = body->kids[0];
    }
    std::string s = head;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (i) s += ", ";
        s += vars[i];
    }
    if (!f->place.empty()) s += " in " + f->place;
    return s + " . " + print(body, 0);
}

std::string print(const formula& f, int context) {
    std::string s;
    switch (f->k) {
    case fk::tt: s = "true"; break;
    case fk::ff: s = "false"; break;
    case fk::token_eq: s = f->var + " = " + f->var2; break;
    case fk::place: s = f->place + "(" + f->var + ")"; break;
    case fk::pred: s = to_string(f->atom); break;
    case fk::not_: {
        const formula& k = f->kids[0];
        bool atomic = k->k == fk::place || k->k == fk::tt || k->k == fk::ff;
        s = atomic ? "!" + print(k, 6) : "!(" + print(k, 0) + ")";
        break;
    }
    case fk::and_:
    case fk::or_: {
        const char* sep = f->k == fk::and_ ? " & " : " | ";
        for (std::size_t i = 0; i < f->kids.size(); ++i) {
            if (i) s += sep;
            s += print(f->kids[i], precedence(f) + 1);
        }
        break;
    }
    case fk::exists:
    case fk::forall: s = print_quantifier(f); break;
    }
    if (precedence(f) < context) return "(" + s + ")";
    return s;
}

}  // namespace

std::string to_string(const formula& f) { return print(f, 0); }

// ---------------------------------------------------------------------------
// canonical form

namespace {

struct canon_env {
    std::map<std::string, std::string> tok, col;
    int depth = 0;
};

std::string canon_term(const color_term& t, const canon_env& env) {
    auto tr = [](const std::map<std::string, std::string>& m, const std::string& v) {
        auto it = m.find(v);
        return it == m.end() ? v : it->second;
    };
    switch (t->k) {
    case color_term_node::kind::var: return tr(env.col, t->name);
    case color_term_node::kind::token_color: return "d" + std::to_string(t->index) + "(" + tr(env.tok, t->name) + ")";
    case color_term_node::kind::literal: return t->lit.to_string();
    case color_term_node::kind::apply: {
        std::string s = t->name + "(";
        for (std::size_t i = 0; i < t->args.size(); ++i) s += (i ? "," : "") + canon_term(t->args[i], env);
        return s + ")";
    }
    }
    return {};
}

std::string canon(const formula& f, bool negated, canon_env& env) {
    auto tr = [](const std::map<std::string, std::string>& m, const std::string& v) {
        auto it = m.find(v);
        return it == m.end() ? v : it->second;
    };
    auto lit = [&](std::string atom) { return negated ? "~" + atom : atom; };
    switch (f->k) {
    case fk::tt: return negated ? "F" : "T";
    case fk::ff: return negated ? "T" : "F";
    case fk::token_eq: {
        std::string a = tr(env.tok, f->var), b = tr(env.tok, f->var2);
        if (a == b) return negated ? "F" : "T";
        if (b < a) std::swap(a, b);
        return lit("eq(" + a + "," + b + ")");
    }
    case fk::place: return lit(f->place + "(" + tr(env.tok, f->var) + ")");
    case fk::pred: {
        std::vector<std::string> args;
        for (const auto& t : f->atom.args) args.push_back(canon_term(t, env));
        if ((f->atom.predicate == "=" || f->atom.predicate == "!=") && args.size() == 2 && args[1] < args[0])
            std::swap(args[0], args[1]);
        std::string s = f->atom.predicate + "(";
        for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
        return lit(s + ")");
    }
    case fk::not_: return canon(f->kids[0], !negated, env);
    case fk::and_:
    case fk::or_: {
        bool conj = (f->k == fk::and_) != negated;
        // Flatten nested junctions of the same effective polarity.
        std::vector<std::string> parts;
        std::function<void(const formula&, bool)> gather = [&](const formula& g, bool neg) {
            bool g_conj = g->k == fk::and_ ? !neg : g->k == fk::or_ ? neg : !conj;
            if ((g->k == fk::and_ || g->k == fk::or_) && g_conj == conj) {
                for (const auto& k : g->kids) gather(k, neg);
            } else if (g->k == fk::not_ && (g->kids[0]->k == fk::and_ || g->kids[0]->k == fk::or_)) {
                gather(g->kids[0], !neg);
            } else {
                parts.push_back(canon(g, neg, env));
            }
        };
        for (const auto& k : f->kids) gather(k, negated);
        std::sort(parts.begin(), parts.end());
        parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
        std::string unit = conj ? "T" : "F";
        std::string zero = conj ? "F" : "T";
        std::vector<std::string> kept;
        for (auto& p : parts) {
            if (p == zero) return zero;
            if (p != unit) kept.push_back(p);
        }
        if (kept.empty()) return unit;
        if (kept.size() == 1) return kept[0];
        std::string s = conj ? "and[" : "or[";
        for (std::size_t i = 0; i < kept.size(); ++i) s += (i ? ";" : "") + kept[i];
        return s + "]";
    }
    case fk::exists:
    case fk::forall: {
        bool ex = (f->k == fk::exists) != negated;
        auto& scope = f->sort == var_sort::token ? env.tok : env.col;
        std::string name = "#" + std::to_string(env.depth++);
        auto saved = scope.count(f->var) ? std::optional<std::string>(scope[f->var]) : std::nullopt;
        scope[f->var] = name;
        std::string body = canon(f->kids[0], negated, env);
        if (saved)
            scope[f->var] = *saved;
        else
            scope.erase(f->var);
        env.depth--;
        std::string head = ex ? "E" : "A";
        head += f->sort == var_sort::color ? "c" : "t";
        if (!f->place.empty()) head += "@" + f->place;
        return head + "." + body;
    }
    }
    return {};
}

}  // namespace

std::string canonical_string(const formula& f) {
    canon_env env;
    return canon(f, false, env);
}

bool alpha_ac_equal(const formula& a, const formula& b) { return canonical_string(a) == canonical_string(b); }

}  // namespace cpnv
