#include "cpnv/sat.hpp"

#include "cpnv/errors.hpp"

#include <algorithm>
#include <numeric>

namespace cpnv {

namespace {

bool has_token_quantifier(const formula& f) {
    if (f->is_quantifier() && f->sort == var_sort::token) return true;
    return std::any_of(f->kids.begin(), f->kids.end(), has_token_quantifier);
}

// True if an existential token quantifier sits below a universal one (NNF).
bool exists_under_forall(const formula& f, bool under = false) {
    if (f->is_quantifier() && f->sort == var_sort::token) {
        if (f->k == fk::exists && under) return true;
        under |= f->k == fk::forall;
    }
    return std::any_of(f->kids.begin(), f->kids.end(), [&](const formula& k) { return exists_under_forall(k, under); });
}

formula fold_junction(fk k, std::vector<formula> kids) {
    bool conj = k == fk::and_;
    std::vector<formula> out;
    for (auto& c : kids) {
        if (c->k == (conj ? fk::tt : fk::ff)) continue;
        if (c->k == (conj ? fk::ff : fk::tt)) return mk_bool(!conj);
        if (c->k == k)
            out.insert(out.end(), c->kids.begin(), c->kids.end());
        else
            out.push_back(std::move(c));
    }
    return conj ? mk_and(std::move(out)) : mk_or(std::move(out));
}

void token_colors(const color_term& t, std::set<std::pair<std::string, int>>& out) {
    if (t->k == color_term_node::kind::token_color) out.insert({t->name, t->index});
    for (const auto& a : t->args) token_colors(a, out);
}

value default_value(const color_theory& theory) {
    if (theory.domain == domain_kind::finite_enum && !theory.enum_values.empty()) return theory.enum_values.front();
    return value(0);
}

// Evaluates token structure of a formula over a symbolic marking: a fixed list
// of active tokens plus inactive tokens created on demand. Inactive tokens
// share one color vector; active tokens get their own color variables. In
// presence mode each active token also carries a 0/1 variable and guarded
// quantifiers range over the present ones only.
class expander {
public:
    expander(std::vector<guessed_token> active, std::vector<std::string> places, name_supply names, bool presence)
        : active_(std::move(active)), places_(std::move(places)), names_(std::move(names)), presence_(presence),
          next_inactive_(static_cast<int>(active_.size())) {}

    formula run(const formula& f) {
        switch (f->k) {
        case fk::tt:
        case fk::ff: return f;
        case fk::token_eq: return mk_bool(lookup(f->var) == lookup(f->var2));
        case fk::place: return mk_bool(place_of(lookup(f->var)) == f->place);
        case fk::pred: return pred(f);
        case fk::not_: {
            formula k = run(f->kids[0]);
            if (k->k == fk::tt || k->k == fk::ff) return mk_bool(k->k == fk::ff);
            return mk_not(k);
        }
        case fk::and_:
        case fk::or_: {
            std::vector<formula> kids;
            for (const auto& k : f->kids) {
                kids.push_back(run(k));
                if (kids.back()->k == (f->k == fk::and_ ? fk::ff : fk::tt)) return kids.back();
            }
            return fold_junction(f->k, std::move(kids));
        }
        case fk::exists:
        case fk::forall: return f->sort == var_sort::color ? color_quantifier(f) : token_quantifier(f);
        }
        return f;
    }

    const std::vector<guessed_token>& active() const { return active_; }

    // Color variable of d_k for active token i, or of the shared inactive
    // vector when i < 0.
    const std::string* color_name(int i, int k) const {
        auto it = color_names_.find({i, k});
        return it == color_names_.end() ? nullptr : &it->second;
    }
    const std::string* presence_name(int i) const {
        auto it = presence_names_.find(i);
        return it == presence_names_.end() ? nullptr : &it->second;
    }

private:
    int lookup(const std::string& v) const {
        auto it = env_.find(v);
        if (it == env_.end()) throw cpnv_error(error_kind::free_variable, "token variable '" + v + "' is not bound");
        return it->second;
    }

    bool is_active(int t) const { return t < static_cast<int>(active_.size()); }
    const std::string& place_of(int t) const { return is_active(t) ? active_[t].place : bottom_place; }

    const std::string& color_var(int t, int k) {
        int key = is_active(t) ? t : -1;
        auto it = color_names_.find({key, k});
        if (it != color_names_.end()) return it->second;
        std::string base = "s" + std::to_string(k) + "_" + (key < 0 ? std::string("bot") : active_[t].name);
        return color_names_.emplace(std::pair{key, k}, names_.fresh(base)).first->second;
    }

    formula presence(int t) {
        auto it = presence_names_.find(t);
        if (it == presence_names_.end()) it = presence_names_.emplace(t, names_.fresh("a_" + active_[t].name)).first;
        return mk_pred("=", {make_color_var(it->second), make_literal(1)});
    }

    formula pred(const formula& f) {
        std::set<std::pair<std::string, int>> used;
        for (const auto& a : f->atom.args) token_colors(a, used);
        if (used.empty()) return f;
        color_replacement repl;
        for (const auto& [x, k] : used) repl[{x, k}] = make_color_var(color_var(lookup(x), k));
        return mk_pred(substitute_token_colors(f->atom, repl));
    }

    formula color_quantifier(const formula& f) {
        formula body = run(f->kids[0]);
        if (body->k == fk::tt || body->k == fk::ff) return body;
        return mk_quantifier(f->k, var_sort::color, f->var, "", body);
    }

    formula token_quantifier(const formula& f) {
        bool ex = f->k == fk::exists;
        bool unguarded = f->place.empty();
        std::vector<int> candidates;
        for (int i = 0; i < static_cast<int>(active_.size()); ++i)
            if (unguarded || active_[i].place == f->place) candidates.push_back(i);
        if (unguarded || f->place == bottom_place) {
            std::set<int> bound;
            for (const auto& [v, t] : env_)
                if (!is_active(t)) bound.insert(t);
            candidates.insert(candidates.end(), bound.begin(), bound.end());
            candidates.push_back(next_inactive_++);
        }
        auto saved = env_.find(f->var) == env_.end() ? std::optional<int>{} : std::optional<int>{env_[f->var]};
        std::vector<formula> parts;
        formula absorbing = mk_bool(ex);
        for (int t : candidates) {
            env_[f->var] = t;
            formula b = run(f->kids[0]);
            if (presence_ && is_active(t) && !unguarded)
                b = ex ? fold_junction(fk::and_, {presence(t), b}) : fold_junction(fk::or_, {mk_not(presence(t)), b});
            if (b->k == absorbing->k) {
                parts = {absorbing};
                break;
            }
            parts.push_back(b);
        }
        if (saved)
            env_[f->var] = *saved;
        else
            env_.erase(f->var);
        return fold_junction(ex ? fk::or_ : fk::and_, std::move(parts));
    }

    std::vector<guessed_token> active_;
    std::vector<std::string> places_;
    name_supply names_;
    bool presence_;
    int next_inactive_;
    std::map<std::string, int> env_;
    std::map<std::pair<int, int>, std::string> color_names_;
    std::map<int, std::string> presence_names_;
};

// Upper bound, per place, on the number of tokens a small model needs: the
// existential token binders not below a universal token binder. Unguarded
// binders may land anywhere and count for every place.
std::map<std::string, int> small_model_bounds(const formula& g, const std::vector<std::string>& places) {
    std::map<std::string, int> bounds;
    int anywhere = 0;
    auto walk = [&](auto&& self, const formula& f, bool under) -> void {
        if (f->is_quantifier() && f->sort == var_sort::token) {
            if (f->k == fk::forall) under = true;
            if (f->k == fk::exists && !under) {
                if (f->place.empty())
                    ++anywhere;
                else if (f->place != bottom_place)
                    ++bounds[f->place];
            }
        }
        for (const auto& k : f->kids) self(self, k, under);
    };
    walk(walk, g, false);
    if (anywhere > 0)
        for (const auto& p : places) bounds[p] += anywhere;
    for (auto it = bounds.begin(); it != bounds.end();) it = it->second == 0 ? bounds.erase(it) : std::next(it);
    return bounds;
}

// All token-count vectors below `bounds`, smallest total first.
std::vector<std::vector<guessed_token>> enumerate_structures(const std::map<std::string, int>& bounds, long limit) {
    double count = 1;
    for (const auto& [p, n] : bounds) count *= n + 1;
    if (count > static_cast<double>(limit))
        throw cpnv_error(error_kind::budget_exceeded, "small-model search needs " + std::to_string(count) +
                                                          " guesses (limit " + std::to_string(limit) + ")");
    std::vector<std::pair<std::string, int>> dims(bounds.begin(), bounds.end());
    std::vector<std::vector<int>> counts{{}};
    for (const auto& [p, n] : dims) {
        std::vector<std::vector<int>> next;
        for (const auto& c : counts)
            for (int i = 0; i <= n; ++i) {
                next.push_back(c);
                next.back().push_back(i);
            }
        counts = std::move(next);
    }
    std::stable_sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
        return std::accumulate(a.begin(), a.end(), 0) < std::accumulate(b.begin(), b.end(), 0);
    });
    std::vector<std::vector<guessed_token>> out;
    for (const auto& c : counts) {
        std::vector<guessed_token> tokens;
        for (std::size_t d = 0; d < dims.size(); ++d)
            for (int i = 0; i < c[d]; ++i)
                tokens.push_back({"t" + std::to_string(tokens.size()), dims[d].first});
        out.push_back(std::move(tokens));
    }
    return out;
}

formula close_colors(const formula& f) {
    formula out = f;
    auto fv = free_vars(f).colors;
    for (auto it = fv.rbegin(); it != fv.rend(); ++it) out = mk_exists_color(*it, out);
    return out;
}

struct header {
    fk k;
    var_sort sort;
    std::string var;
    std::string place;
};

struct prenex_split {
    std::vector<header> ex, all;
    formula matrix;
};

std::optional<prenex_split> split_prenex(const formula& g) {
    prenex_split s;
    formula cur = g;
    for (; cur->k == fk::exists; cur = cur->kids[0]) s.ex.push_back({cur->k, cur->sort, cur->var, cur->place});
    for (; cur->k == fk::forall; cur = cur->kids[0]) s.all.push_back({cur->k, cur->sort, cur->var, cur->place});
    if (has_token_quantifier(cur)) return std::nullopt;
    s.matrix = cur;
    return s;
}

concrete_marking build_witness(const expander& ex, const std::map<std::string, value>& model, const signature& sig,
                               bool presence) {
    concrete_marking m;
    m.n_colors = sig.n_colors;
    auto color = [&](int i, int k) {
        const std::string* name = ex.color_name(i, k);
        if (name) {
            auto it = model.find(*name);
            if (it != model.end()) return it->second;
        }
        return default_value(sig.theory);
    };
    for (int k = 1; k <= sig.n_colors; ++k) m.default_colors.push_back(color(-1, k));
    const auto& active = ex.active();
    for (int i = 0; i < static_cast<int>(active.size()); ++i) {
        if (presence) {
            const std::string* a = ex.presence_name(i);
            if (!a || !model.count(*a) || model.at(*a) != value(1)) continue;
        }
        token_state st{active[i].place, {}};
        for (int k = 1; k <= sig.n_colors; ++k) st.colors.push_back(color(i, k));
        m.support.emplace(i, std::move(st));
    }
    return m;
}

solver_outcome ask(const formula& s0, const signature& sig, const sat_options& opts, reduction_trace& trace) {
    std::string script = emit_smt(s0, sig.theory, opts.solver.produce_models, opts.solver.logic_override);
    if (opts.on_query) opts.on_query(script);
    ++trace.solver_queries;
    solver_outcome out = run_query(script, opts.solver);
    if (out.result == verdict::error) {
        std::string tail = out.transcript.size() > 400 ? out.transcript.substr(out.transcript.size() - 400)
                                                       : out.transcript;
        throw cpnv_error(error_kind::solver_failure, "solver reported an error: " + tail);
    }
    return out;
}

}  // namespace

formula upward_closure(const formula& phi) {
    if (!is_closed(phi)) throw cpnv_error(error_kind::free_variable, "upward closure needs a closed formula");
    fragment frag = classify_fragment(phi);
    if (!fragment_leq(frag, fragment::sigma2))
        throw cpnv_error(error_kind::fragment_unsupported,
                         "upward closure is defined for Sigma2, got " + std::string(to_string(frag)));
    name_supply names;
    auto split = split_prenex(to_nnf(rename_apart(phi, names)));
    if (!split) split = split_prenex(to_pnf(phi));
    if (!split) throw cpnv_error(error_kind::fragment_unsupported, "no exists-forall prefix found");

    std::vector<header> ys, ws;
    for (const auto& h : split->all) (h.sort == var_sort::token ? ys : ws).push_back(h);
    if (ys.empty()) return phi;
    std::vector<header> xs;
    for (const auto& h : split->ex)
        if (h.sort == var_sort::token) xs.push_back(h);

    std::vector<formula> conjuncts;
    std::vector<std::size_t> choice(ys.size(), 0);
    auto rec = [&](auto&& self, std::size_t i, formula body, std::vector<formula> guards) -> void {
        if (conjuncts.size() > 1000000)
            throw cpnv_error(error_kind::budget_exceeded, "upward closure has more than 10^6 conjuncts");
        if (i == ys.size()) {
            guards.push_back(body);
            conjuncts.push_back(mk_or(std::move(guards)));
            return;
        }
        for (const auto& x : xs) {
            std::vector<formula> g = guards;
            if (!ys[i].place.empty()) {
                if (x.place.empty())
                    g.push_back(mk_not(mk_place(ys[i].place, x.var)));
                else if (x.place != ys[i].place)
                    continue;
            }
            self(self, i + 1, substitute_token(body, ys[i].var, x.var), std::move(g));
        }
    };
    rec(rec, 0, split->matrix, {});
    formula out = mk_and(std::move(conjuncts));
    for (auto w = ws.rbegin(); w != ws.rend(); ++w) out = mk_quantifier(fk::forall, var_sort::color, w->var, "", out);
    for (auto x = split->ex.rbegin(); x != split->ex.rend(); ++x) out = mk_quantifier(x->k, x->sort, x->var, x->place, out);
    return out;
}

formula sigma1_to_sigma0(const formula& phi, const std::vector<std::string>& places) {
    if (!is_closed(phi)) throw cpnv_error(error_kind::free_variable, "sigma1_to_sigma0 needs a closed formula");
    name_supply names;
    formula g = to_nnf(rename_apart(phi, names));
    bool universal = false;
    auto walk = [&](auto&& self, const formula& f) -> void {
        if (f->k == fk::forall && f->sort == var_sort::token) universal = true;
        for (const auto& k : f->kids) self(self, k);
    };
    walk(walk, g);
    if (universal)
        throw cpnv_error(error_kind::fragment_unsupported,
                         "expected Sigma1, got " + std::string(to_string(classify_fragment(phi))));
    names.reserve(g);
    std::vector<formula> branches;
    for (const auto& tokens : enumerate_structures(small_model_bounds(g, places), 200000)) {
        expander ex(tokens, places, names, false);
        formula s0 = simplify(ex.run(g));
        if (s0->k == fk::ff) continue;
        branches.push_back(close_colors(s0));
    }
    return simplify(mk_or(std::move(branches)));
}

sat_result check_sat(const formula& phi, const signature& sig, const sat_options& opts) {
    if (!is_closed(phi)) throw cpnv_error(error_kind::free_variable, "check_sat needs a closed formula");
    formula sf = simplify(to_special_form(phi, sig.places));
    sat_result res;
    reduction_trace& tr = res.trace;
    tr.input_fragment = classify_fragment(sf);
    if (!fragment_leq(tr.input_fragment, fragment::sigma2))
        throw cpnv_error(error_kind::fragment_unsupported,
                         "formula is in " + std::string(to_string(tr.input_fragment)) +
                             "; satisfiability beyond Sigma2 is undecidable");
    name_supply names;
    names.reserve(sf);
    formula g = to_nnf(rename_apart(sf, names));
    if (exists_under_forall(g)) g = miniscope(g);
    if (exists_under_forall(g))
        throw cpnv_error(error_kind::fragment_unsupported, "no exists-forall arrangement of the token quantifiers");
    names.reserve(g);
    if (opts.record_upward_closure) tr.upward_closure = upward_closure(sf);

    auto bounds = small_model_bounds(g, sig.places);
    for (const auto& [p, n] : bounds) tr.existential_token_vars += n;
    if (tr.existential_token_vars == 0 && has_token_quantifier(g))
        tr.warnings.push_back("no existential token variables: only the empty marking is examined");

    auto finish_sat = [&](const expander& ex, const std::vector<guessed_token>& tokens, const formula& s0,
                          const std::optional<std::map<std::string, value>>& model, bool presence) {
        res.result = verdict::sat;
        tr.solver_verdict = verdict::sat;
        tr.sigma0 = s0;
        if (model) {
            res.witness = build_witness(ex, *model, sig, presence);
            for (const auto& [id, st] : res.witness->support) tr.guessed_structure.push_back(tokens[id]);
        } else if (!presence) {
            tr.guessed_structure = tokens;
        }
        return res;
    };

    if (opts.strategy == sat_strategy::single_query) {
        std::vector<guessed_token> tokens;
        for (const auto& [p, n] : bounds)
            for (int i = 0; i < n; ++i) tokens.push_back({"t" + std::to_string(tokens.size()), p});
        tr.guesses = 1;
        expander ex(tokens, sig.places, names, true);
        formula s0 = simplify(ex.run(g));
        if (s0->k == fk::ff) {
            res.result = tr.solver_verdict = verdict::unsat;
            tr.sigma0 = s0;
            return res;
        }
        if (s0->k == fk::tt) return finish_sat(ex, tokens, s0, std::map<std::string, value>{}, true);
        auto out = ask(s0, sig, opts, tr);
        if (out.result == verdict::sat) return finish_sat(ex, tokens, s0, out.model, true);
        res.result = tr.solver_verdict = out.result;
        tr.sigma0 = s0;
        return res;
    }

    bool unknown = false;
    std::vector<formula> queried;
    for (const auto& tokens : enumerate_structures(bounds, opts.max_guesses)) {
        ++tr.guesses;
        expander ex(tokens, sig.places, names, false);
        formula s0 = simplify(ex.run(g));
        if (s0->k == fk::ff) continue;
        if (s0->k == fk::tt) return finish_sat(ex, tokens, s0, std::map<std::string, value>{}, false);
        auto out = ask(s0, sig, opts, tr);
        if (out.result == verdict::sat) return finish_sat(ex, tokens, s0, out.model, false);
        unknown |= out.result == verdict::unknown;
        queried.push_back(s0);
    }
    res.result = tr.solver_verdict = unknown ? verdict::unknown : verdict::unsat;
    tr.sigma0 = mk_or(std::move(queried));
    return res;
}

}  // namespace cpnv
