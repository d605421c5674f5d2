#include "cpnv/image.hpp"

#include "cpnv/errors.hpp"
#include "cpnv/normal_forms.hpp"

#include <algorithm>

namespace cpnv {

std::string color_var_name(int k, const std::string& var) { return "c" + std::to_string(k) + "_" + var; }

namespace {

bool member(const std::vector<std::string>& zs, const std::string& v) {
    return std::find(zs.begin(), zs.end(), v) != zs.end();
}

void check_binders(const formula& phi, const std::vector<std::string>& zs) {
    auto bv = bound_vars(phi);
    for (const auto& z : zs)
        if (bv.tokens.count(z) || bv.colors.count(z))
            throw cpnv_error(error_kind::variable_clash, "variable " + z + " is bound in the rewritten formula");
}

// Token equality under both operators: unchanged between surviving tokens,
// true for syntactically equal variables, false otherwise.
formula rewrite_eq(const formula& f, const std::vector<std::string>& zs) {
    if (f->var == f->var2) return mk_true();
    if (!member(zs, f->var) && !member(zs, f->var2)) return f;
    return mk_false();
}

formula ominus_rec(const formula& f, const deletion_context& ctx) {
    switch (f->k) {
    case fk::tt:
    case fk::ff: return f;
    case fk::pred: return mk_pred(substitute_token_colors(f->atom, ctx.col));
    case fk::token_eq: return rewrite_eq(f, ctx.zs);
    case fk::place: throw cpnv_error(error_kind::not_special_form, "place atom " + to_string(f));
    case fk::not_:
    case fk::and_:
    case fk::or_: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(ominus_rec(k, ctx));
        return with_kids(f, std::move(kids));
    }
    case fk::exists:
    case fk::forall: {
        if (f->sort == var_sort::color) return with_kids(f, {ominus_rec(f->kids[0], ctx)});
        if (!f->is_guarded()) throw cpnv_error(error_kind::not_special_form, "unguarded token quantifier over " + f->var);
        // Case split: the quantified token survives, or it is one of the
        // deleted tokens sitting in the guard place.
        std::vector<formula> parts{mk_quantifier(f->k, f->sort, f->var, f->place, ominus_rec(f->kids[0], ctx))};
        for (const auto& z : ctx.zs) {
            auto it = ctx.loc.find(z);
            if (it == ctx.loc.end() || it->second != f->place) continue;
            parts.push_back(ominus_rec(substitute_token(f->kids[0], f->var, z), ctx));
        }
        return f->k == fk::exists ? mk_or(std::move(parts)) : mk_and(std::move(parts));
    }
    }
    return f;
}

formula oplus_rec(const formula& f, const addition_context& ctx, const image_options& opts) {
    switch (f->k) {
    case fk::tt:
    case fk::ff:
    case fk::pred: return f;
    case fk::token_eq: return rewrite_eq(f, ctx.zs);
    case fk::place: throw cpnv_error(error_kind::not_special_form, "place atom " + to_string(f));
    case fk::not_:
    case fk::and_:
    case fk::or_: {
        std::vector<formula> kids;
        for (const auto& k : f->kids) kids.push_back(oplus_rec(k, ctx, opts));
        return with_kids(f, std::move(kids));
    }
    case fk::exists:
    case fk::forall: {
        formula body = oplus_rec(f->kids[0], ctx, opts);
        if (f->sort == var_sort::color) return with_kids(f, {body});
        if (!f->is_guarded()) throw cpnv_error(error_kind::not_special_form, "unguarded token quantifier over " + f->var);
        // Quantified tokens of the old marking are not the added ones.
        std::vector<formula> excl;
        if (!opts.drop_oplus_disequalities) {
            for (const auto& z : ctx.zs) {
                auto it = ctx.loc.find(z);
                if (it == ctx.loc.end() || it->second != f->place) continue;
                excl.push_back(mk_token_eq(f->var, z));
            }
        }
        if (excl.empty()) return mk_quantifier(f->k, f->sort, f->var, f->place, body);
        if (f->k == fk::exists) {
            std::vector<formula> parts{body};
            for (auto& e : excl) parts.push_back(mk_not(e));
            return mk_quantifier(f->k, f->sort, f->var, f->place, mk_and(std::move(parts)));
        }
        std::vector<formula> parts{body};
        for (auto& e : excl) parts.push_back(e);
        return mk_quantifier(f->k, f->sort, f->var, f->place, mk_or(std::move(parts)));
    }
    }
    return f;
}

struct binder {
    std::string var;
    std::string place;
};

// exists b1 .. bn . exists cs . body, with conjuncts of body that mention
// none of the block variables kept outside the block.
formula close_block(const formula& body, const std::vector<binder>& tokens, const std::vector<std::string>& colors) {
    if (body->k == fk::ff) return body;
    std::vector<formula> conjuncts = body->k == fk::and_ ? body->kids : std::vector<formula>{body};
    std::vector<formula> outside, inside;
    for (const auto& c : conjuncts) {
        auto fv = free_vars(c);
        bool mentions = std::any_of(tokens.begin(), tokens.end(), [&](const binder& b) { return fv.tokens.count(b.var); }) ||
                        std::any_of(colors.begin(), colors.end(), [&](const std::string& v) { return fv.colors.count(v); });
        (mentions ? inside : outside).push_back(c);
    }
    formula inner = mk_and(std::move(inside));
    for (auto it = colors.rbegin(); it != colors.rend(); ++it)
        if (occurs_free(inner, *it)) inner = mk_exists_color(*it, inner);
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) inner = mk_exists_token_in(it->var, it->place, inner);
    outside.push_back(inner);
    return simplify(mk_and(std::move(outside)));
}

std::vector<formula> distinct_same_place(const std::vector<std::string>& vars, const std::vector<std::string>& places) {
    std::vector<formula> out;
    for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            if (places[i] == places[j]) out.push_back(mk_not(mk_token_eq(vars[i], vars[j])));
    return out;
}

struct prepared {
    formula phi;
    formula guard;
    std::vector<std::string> xs, ys;
    std::map<std::string, std::string> loc_x, loc_y;
};

prepared prepare(const formula& phi, const cpn_transition& t, const signature& sig) {
    if (!is_closed(phi)) throw cpnv_error(error_kind::free_variable, "image of an open formula");
    prepared p;
    p.xs = t.lhs_vars();
    p.ys = t.rhs_vars();
    for (std::size_t i = 0; i < p.xs.size(); ++i) p.loc_x[p.xs[i]] = t.lhs[i];
    for (std::size_t j = 0; j < p.ys.size(); ++j) p.loc_y[p.ys[j]] = t.rhs[j];
    name_supply names;
    for (const auto* vs : {&p.xs, &p.ys})
        for (const auto& v : *vs) {
            names.reserve(v);
            for (int k = 1; k <= sig.n_colors; ++k) names.reserve(color_var_name(k, v));
        }
    // Rename the two parts apart from each other and from the transition variables.
    formula sphi = to_special_form(phi, sig.places);
    formula sguard = to_special_form(t.guard, sig.places, p.loc_x);
    formula both = rename_apart(mk_and(sphi, sguard), names);
    p.phi = both->kids[0];
    p.guard = both->kids[1];
    return p;
}

color_replacement color_vars_for(const std::vector<std::string>& vars, int n_colors, std::vector<std::string>& names) {
    color_replacement col;
    for (const auto& v : vars)
        for (int k = 1; k <= n_colors; ++k) {
            names.push_back(color_var_name(k, v));
            col[{v, k}] = make_color_var(names.back());
        }
    return col;
}

}  // namespace

formula ominus(const formula& phi, const deletion_context& ctx) {
    check_binders(phi, ctx.zs);
    return simplify(ominus_rec(phi, ctx));
}

formula oplus(const formula& phi, const addition_context& ctx, const image_options& opts) {
    check_binders(phi, ctx.zs);
    return simplify(oplus_rec(phi, ctx, opts));
}

formula post_formula(const formula& phi, const cpn_transition& t, const signature& sig, const image_options& opts) {
    prepared p = prepare(phi, t, sig);
    std::vector<std::string> cs;
    deletion_context del{p.xs, p.loc_x, color_vars_for(p.xs, sig.n_colors, cs)};
    formula body = ominus(mk_and(p.phi, p.guard), del);
    if (body->k == fk::ff) return body;
    body = oplus(body, {p.ys, p.loc_y}, opts);
    std::vector<formula> parts{body};
    for (auto& d : distinct_same_place(p.ys, t.rhs)) parts.push_back(d);
    std::vector<binder> bs;
    for (std::size_t j = 0; j < p.ys.size(); ++j) bs.push_back({p.ys[j], t.rhs[j]});
    return close_block(simplify(mk_and(std::move(parts))), bs, cs);
}

formula pre_formula(const formula& phi, const cpn_transition& t, const signature& sig, const image_options& opts) {
    prepared p = prepare(phi, t, sig);
    std::vector<std::string> cs;
    color_replacement col = color_vars_for(p.ys, sig.n_colors, cs);
    // The guard speaks about the source marking, so it only needs the new
    // colors substituted; the target-side formula goes through both operators.
    formula guard = simplify(substitute_token_colors(p.guard, col));
    if (guard->k == fk::ff) return guard;
    formula body = oplus(p.phi, {p.xs, p.loc_x}, opts);
    body = ominus(body, {p.ys, p.loc_y, col});
    std::vector<formula> parts{body, guard};
    for (auto& d : distinct_same_place(p.xs, t.lhs)) parts.push_back(d);
    std::vector<binder> bs;
    for (std::size_t i = 0; i < p.xs.size(); ++i) bs.push_back({p.xs[i], t.lhs[i]});
    return close_block(simplify(mk_and(std::move(parts))), bs, cs);
}

formula post_all(const formula& phi, const cpn& net, const image_options& opts) {
    std::vector<formula> parts;
    for (const auto& t : net.transitions) parts.push_back(post_formula(phi, t, net.sig, opts));
    return simplify(mk_or(std::move(parts)));
}

formula pre_all(const formula& phi, const cpn& net, const image_options& opts) {
    std::vector<formula> parts;
    for (const auto& t : net.transitions) parts.push_back(pre_formula(phi, t, net.sig, opts));
    return simplify(mk_or(std::move(parts)));
}

formula pre_tilde(const formula& phi, const cpn& net) {
    fragment f = classify_fragment(phi);
    if (!fragment_leq(f, fragment::pi1))
        throw cpnv_error(error_kind::fragment_unsupported,
                         "universal predecessor needs a Pi1 formula, got " + std::string(to_string(f)));
    auto report = validate(net);
    if (!report.sigma1_class)
        throw cpnv_error(error_kind::fragment_unsupported, "universal predecessor needs a net with Sigma1 guards");
    formula result = simplify(to_nnf(mk_not(pre_all(simplify(to_nnf(mk_not(phi))), net))));
    return result;
}

}  // namespace cpnv
