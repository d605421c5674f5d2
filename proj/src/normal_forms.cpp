#include "cpnv/normal_forms.hpp"

#include "cpnv/errors.hpp"

#include <algorithm>
#include <set>

namespace cpnv {

std::string_view to_string(fragment f) {
    switch (f) {
    case fragment::sigma0: return "Sigma0";
    case fragment::sigma1: return "Sigma1";
    case fragment::pi1: return "Pi1";
    case fragment::bsigma1: return "BSigma1";
    case fragment::sigma2: return "Sigma2";
    case fragment::pi2: return "Pi2";
    case fragment::higher: return "Higher";
    }
    return "?";
}

bool fragment_leq(fragment a, fragment b) {
    if (a == b || a == fragment::sigma0 || b == fragment::higher) return true;
    switch (a) {
    case fragment::sigma1:
    case fragment::pi1: return b == fragment::bsigma1 || b == fragment::sigma2 || b == fragment::pi2;
    case fragment::bsigma1: return b == fragment::sigma2 || b == fragment::pi2;
    default: return false;
    }
}

fragment dual(fragment f) {
    switch (f) {
    case fragment::sigma1: return fragment::pi1;
    case fragment::pi1: return fragment::sigma1;
    case fragment::sigma2: return fragment::pi2;
    case fragment::pi2: return fragment::sigma2;
    default: return f;
    }
}

// ---------------------------------------------------------------------------

namespace {

formula nnf(const formula& f, bool neg) {
    switch (f->k) {
    case fk::tt: return neg ? mk_false() : f;
    case fk::ff: return neg ? mk_true() : f;
    case fk::token_eq:
    case fk::place:
    case fk::pred: return neg ? mk_not(f) : f;
    case fk::not_: return nnf(f->kids[0], !neg);
    case fk::and_:
    case fk::or_: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(nnf(k, neg));
        bool conj = (f->k == fk::and_) != neg;
        return conj ? mk_and(std::move(kids)) : mk_or(std::move(kids));
    }
    case fk::exists:
    case fk::forall: {
        fk q = neg ? (f->k == fk::exists ? fk::forall : fk::exists) : f->k;
        return mk_quantifier(q, f->sort, f->var, f->place, nnf(f->kids[0], neg));
    }
    }
    return f;
}

}  // namespace

formula to_nnf(const formula& f) { return nnf(f, false); }

// ---------------------------------------------------------------------------
// simplify

namespace {

color_term fold_term(const color_term& t) {
    if (t->k != color_term_node::kind::apply) return t;
    std::vector<color_term> args;
    bool all_lit = true;
    for (const auto& a : t->args) {
        args.push_back(fold_term(a));
        all_lit &= args.back()->k == color_term_node::kind::literal;
    }
    if (all_lit) {
        std::vector<value> vals;
        for (const auto& a : args) vals.push_back(a->lit);
        try {
            if (auto v = apply_builtin_operation(t->name, vals)) return make_literal(*v);
        } catch (const cpnv_error&) {
            // overflow: leave unfolded
        }
    }
    return make_apply(t->name, std::move(args));
}

formula simplify_pred(const formula& f) {
    color_atom a{f->atom.predicate, {}};
    bool all_lit = true;
    for (const auto& t : f->atom.args) {
        a.args.push_back(fold_term(t));
        all_lit &= a.args.back()->k == color_term_node::kind::literal;
    }
    if (all_lit) {
        std::vector<value> vals;
        for (const auto& t : a.args) vals.push_back(t->lit);
        if (auto b = apply_builtin_predicate(a.predicate, vals)) return mk_bool(*b);
    }
    if (a.args.size() == 2 && structurally_equal(a.args[0], a.args[1])) {
        const auto& p = a.predicate;
        if (p == "=" || p == "<=" || p == ">=") return mk_true();
        if (p == "!=" || p == "<" || p == ">") return mk_false();
    }
    return mk_pred(std::move(a));
}

formula simp(const formula& f) {
    switch (f->k) {
    case fk::tt:
    case fk::ff:
    case fk::place: return f;
    case fk::token_eq: return f->var == f->var2 ? mk_true() : f;
    case fk::pred: return simplify_pred(f);
    case fk::not_: {
        formula k = simp(f->kids[0]);
        if (k->k == fk::tt) return mk_false();
        if (k->k == fk::ff) return mk_true();
        if (k->k == fk::not_) return k->kids[0];
        return mk_not(k);
    }
    case fk::and_:
    case fk::or_: {
        const fk self = f->k;
        const fk unit = self == fk::and_ ? fk::tt : fk::ff;
        const fk zero = self == fk::and_ ? fk::ff : fk::tt;
        std::vector<formula> flat;
        for (const auto& k : f->kids) {
            formula s = simp(k);
            if (s->k == self)
                flat.insert(flat.end(), s->kids.begin(), s->kids.end());
            else
                flat.push_back(s);
        }
        std::vector<formula> kept;
        std::set<std::string> seen;
        std::vector<std::string> keys;
        for (const auto& s : flat) {
            if (s->k == zero) return s;
            if (s->k == unit) continue;
            std::string key = canonical_string(s);
            if (!seen.insert(key).second) continue;
            kept.push_back(s);
            keys.push_back(std::move(key));
        }
        for (const auto& s : kept)
            if (seen.count(canonical_string(mk_not(s)))) return mk_bool(zero == fk::tt);
        if (kept.empty()) return mk_bool(unit == fk::tt);
        if (kept.size() == 1) return kept.front();
        return self == fk::and_ ? mk_and(std::move(kept)) : mk_or(std::move(kept));
    }
    case fk::exists:
    case fk::forall: {
        formula body = simp(f->kids[0]);
        bool ex = f->k == fk::exists;
        if (f->is_guarded()) {
            if (ex && body->k == fk::ff) return body;
            if (!ex && body->k == fk::tt) return body;
            return mk_quantifier(f->k, f->sort, f->var, f->place, body);
        }
        // Token and color domains are non-empty, so unguarded quantifiers over
        // a body that does not mention the variable are vacuous.
        if (!occurs_free(body, f->var)) return body;
        return mk_quantifier(f->k, f->sort, f->var, f->place, body);
    }
    }
    return f;
}

}  // namespace

formula simplify(const formula& f) { return simp(f); }

// ---------------------------------------------------------------------------
// special form

bool is_special_form(const formula& f) {
    if (f->k == fk::place) return false;
    if (f->is_quantifier() && f->sort == var_sort::token && f->place.empty()) return false;
    return std::all_of(f->kids.begin(), f->kids.end(), is_special_form);
}

namespace {

formula special(const formula& f, const std::vector<std::string>& places, std::map<std::string, std::string>& loc) {
    switch (f->k) {
    case fk::place: {
        auto it = loc.find(f->var);
        if (it == loc.end())
            throw cpnv_error(error_kind::free_variable, "place atom " + f->place + "(" + f->var +
                                                            ") over a variable with unknown location");
        return mk_bool(it->second == f->place);
    }
    case fk::not_:
    case fk::and_:
    case fk::or_: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(special(k, places, loc));
        return with_kids(f, std::move(kids));
    }
    case fk::exists:
    case fk::forall: {
        if (f->sort == var_sort::color) return with_kids(f, {special(f->kids[0], places, loc)});
        auto saved = loc.find(f->var) == loc.end() ? std::optional<std::string>{} : loc[f->var];
        auto restore = [&] {
            if (saved)
                loc[f->var] = *saved;
            else
                loc.erase(f->var);
        };
        if (f->is_guarded()) {
            loc[f->var] = f->place;
            formula body = special(f->kids[0], places, loc);
            restore();
            return mk_quantifier(f->k, f->sort, f->var, f->place, body);
        }
        std::vector<formula> branches;
        std::vector<std::string> all = places;
        all.push_back(bottom_place);
        for (const auto& p : all) {
            loc[f->var] = p;
            formula body = simplify(special(f->kids[0], places, loc));
            branches.push_back(simplify(mk_quantifier(f->k, f->sort, f->var, p, body)));
        }
        restore();
        return f->k == fk::exists ? mk_or(std::move(branches)) : mk_and(std::move(branches));
    }
    default: return f;
    }
}

}  // namespace

formula to_special_form(const formula& f, const std::vector<std::string>& places,
                        const std::map<std::string, std::string>& locations) {
    auto loc = locations;
    formula g = simplify(special(f, places, loc));
    name_supply names;
    return rename_apart(g, names);
}

formula to_special_form(const formula& f, const std::vector<std::string>& places) {
    auto fv = free_vars(f);
    if (!fv.empty()) {
        std::string v = !fv.tokens.empty() ? *fv.tokens.begin() : *fv.colors.begin();
        throw cpnv_error(error_kind::free_variable, "formula is not closed: " + v + " is free");
    }
    return to_special_form(f, places, {});
}

// ---------------------------------------------------------------------------
// prenex form and classification

namespace {

struct costs {
    int e = 0;  // blocks needed by a prefix starting with an existential block
    int a = 0;  // ... starting with a universal block
    bool relevant = false;  // subtree holds a token quantifier
};

costs cost(const formula& f) {
    switch (f->k) {
    case fk::and_:
    case fk::or_:
    case fk::not_: {
        costs c;
        for (const auto& k : f->kids) {
            costs d = cost(k);
            c.e = std::max(c.e, d.e);
            c.a = std::max(c.a, d.a);
            c.relevant |= d.relevant;
        }
        return c;
    }
    case fk::exists:
    case fk::forall: {
        costs b = cost(f->kids[0]);
        if (!b.relevant && f->sort == var_sort::color) return {};
        costs c;
        c.relevant = true;
        if (f->k == fk::exists) {
            c.e = std::max(1, b.e);
            c.a = 1 + c.e;
        } else {
            c.a = std::max(1, b.a);
            c.e = 1 + c.a;
        }
        return c;
    }
    default: return {};
    }
}

// Leaves of the boolean skeleton: maximal quantified subformulas.
void skeleton_leaves(const formula& f, std::vector<formula>& out) {
    if (f->is_quantifier()) {
        out.push_back(f);
        return;
    }
    for (const auto& k : f->kids) skeleton_leaves(k, out);
}

struct prefix_builder {
    fk start;
    std::vector<std::vector<formula_node>> blocks;

    fk polarity(std::size_t i) const {
        if (i % 2 == 0) return start;
        return start == fk::exists ? fk::forall : fk::exists;
    }

    formula strip(const formula& f, std::size_t cur) {
        switch (f->k) {
        case fk::and_:
        case fk::or_: {
            std::vector<formula> kids;
            for (const auto& k : f->kids) kids.push_back(strip(k, cur));
            return with_kids(f, std::move(kids));
        }
        case fk::exists:
        case fk::forall: {
            std::size_t target = polarity(cur) == f->k ? cur : cur + 1;
            if (blocks.size() <= target) blocks.resize(target + 1);
            formula_node q = *f;
            q.place.clear();
            q.kids.clear();
            blocks[target].push_back(std::move(q));
            formula body = strip(f->kids[0], target);
            if (!f->is_guarded()) return body;
            formula guard = mk_place(f->place, f->var);
            return f->k == fk::exists ? mk_and(guard, body) : mk_or(mk_not(guard), body);
        }
        default: return f;
        }
    }
};

}  // namespace

formula to_pnf(const formula& f) {
    name_supply names;
    formula g = to_nnf(rename_apart(f, names));
    costs c = cost(g);
    prefix_builder b{c.a < c.e ? fk::forall : fk::exists, {}};
    formula matrix = b.strip(g, 0);
    for (auto block = b.blocks.rbegin(); block != b.blocks.rend(); ++block)
        for (auto q = block->rbegin(); q != block->rend(); ++q) matrix = mk_quantifier(q->k, q->sort, q->var, "", matrix);
    return matrix;
}

namespace {

// The prenex form of a boolean combination of Sigma1 formulas is classified
// Sigma2 syntactically; miniscoping recovers the boolean structure.
formula miniscope_nnf(const formula& f) {
    switch (f->k) {
    case fk::and_:
    case fk::or_: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(miniscope_nnf(k));
        return with_kids(f, std::move(kids));
    }
    case fk::exists:
    case fk::forall: {
        formula body = miniscope_nnf(f->kids[0]);
        auto requantify = [&](const formula& b) {
            if (occurs_free(b, f->var)) return mk_quantifier(f->k, f->sort, f->var, f->place, b);
            if (!f->is_guarded()) return b;
            // A vacuous guarded quantifier only asks whether the place is empty.
            bool ex = f->k == fk::exists;
            formula probe = mk_quantifier(f->k, f->sort, f->var, f->place, mk_bool(ex));
            return ex ? mk_and(probe, b) : mk_or(probe, b);
        };
        if (body->k != fk::and_ && body->k != fk::or_) return requantify(body);
        bool distributes = (f->k == fk::exists) == (body->k == fk::or_);
        std::vector<formula> kids;
        if (distributes) {
            for (const auto& k : body->kids) kids.push_back(miniscope_nnf(requantify(k)));
            return with_kids(body, std::move(kids));
        }
        std::vector<formula> inner;
        for (const auto& k : body->kids) (occurs_free(k, f->var) ? inner : kids).push_back(k);
        if (kids.empty()) return requantify(body);
        kids.push_back(requantify(with_kids(body, std::move(inner))));
        return with_kids(body, std::move(kids));
    }
    default: return f;
    }
}

fragment classify_nnf(const formula& g) {
    costs c = cost(g);
    if (c.e == 0 && c.a == 0) return fragment::sigma0;
    if (c.e <= 1) return fragment::sigma1;
    if (c.a <= 1) return fragment::pi1;
    std::vector<formula> leaves;
    skeleton_leaves(g, leaves);
    bool boolean_of_sigma1 = std::all_of(leaves.begin(), leaves.end(), [](const formula& l) {
        costs d = cost(l);
        return std::min(d.e, d.a) <= 1;
    });
    if (boolean_of_sigma1) return fragment::bsigma1;
    if (c.e == 2) return fragment::sigma2;
    if (c.a == 2) return fragment::pi2;
    return fragment::higher;
}

}  // namespace

formula miniscope(const formula& f) { return miniscope_nnf(to_nnf(f)); }

fragment classify_fragment(const formula& f) {
    formula g = to_nnf(f);
    fragment direct = classify_nnf(g);
    if (direct == fragment::sigma0 || direct == fragment::sigma1 || direct == fragment::pi1) return direct;
    fragment scoped = classify_nnf(miniscope_nnf(g));
    return fragment_leq(scoped, direct) ? scoped : direct;
}

}  // namespace cpnv
