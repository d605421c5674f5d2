#include "cpnv/oracle.hpp"

#include "cpnv/errors.hpp"
#include "cpnv/normal_forms.hpp"

#include <algorithm>
#include <set>

namespace cpnv {

namespace {

std::vector<color_vector> all_vectors(const std::vector<value>& colors, int n) {
    std::vector<color_vector> out{{}};
    for (int k = 0; k < n; ++k) {
        std::vector<color_vector> next;
        for (const auto& v : out)
            for (const auto& c : colors) {
                next.push_back(v);
                next.back().push_back(c);
            }
        out = std::move(next);
    }
    return out;
}

// Ordered tuples of distinct support tokens, the i-th one sitting in places[i].
std::vector<std::vector<token_id>> matchings(const concrete_marking& m, const std::vector<std::string>& places) {
    std::vector<std::vector<token_id>> out;
    std::vector<token_id> cur;
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == places.size()) {
            out.push_back(cur);
            return;
        }
        for (const auto& [id, st] : m.support) {
            if (st.place != places[i] || std::find(cur.begin(), cur.end(), id) != cur.end()) continue;
            cur.push_back(id);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

std::vector<token_id> fresh_ids(const concrete_marking& m, std::size_t n) {
    std::vector<token_id> ids;
    while (ids.size() < n) ids.push_back(m.smallest_unused(ids));
    return ids;
}

// Guard with the created tokens' colors fixed to constants.
formula fix_created_colors(const cpn_transition& t, const std::vector<color_vector>& created) {
    color_replacement repl;
    auto ys = t.rhs_vars();
    for (std::size_t j = 0; j < ys.size(); ++j)
        for (std::size_t k = 0; k < created[j].size(); ++k)
            repl[{ys[j], static_cast<int>(k) + 1}] = make_literal(created[j][k]);
    return substitute_token_colors(t.guard, repl);
}

token_valuation transition_valuation(const cpn_transition& t, const std::vector<token_id>& xs,
                                     const std::vector<token_id>& ys) {
    token_valuation theta;
    auto xv = t.lhs_vars();
    auto yv = t.rhs_vars();
    for (std::size_t i = 0; i < xs.size(); ++i) theta[xv[i]] = xs[i];
    for (std::size_t j = 0; j < ys.size(); ++j) theta[yv[j]] = ys[j];
    return theta;
}

// Every way of giving `n` tokens one color vector each.
std::vector<std::vector<color_vector>> color_assignments(const std::vector<color_vector>& vectors, std::size_t n) {
    std::vector<std::vector<color_vector>> out{{}};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::vector<color_vector>> next;
        for (const auto& a : out)
            for (const auto& v : vectors) {
                next.push_back(a);
                next.back().push_back(v);
            }
        out = std::move(next);
    }
    return out;
}

void check_fresh_bound(const cpn_transition& t, std::size_t n, const oracle_bounds& b) {
    if (static_cast<int>(n) > b.max_fresh_per_step)
        throw cpnv_error(error_kind::oracle_unsupported,
                         "transition " + t.name + " moves more tokens than max_fresh_per_step allows");
}

}  // namespace

std::vector<value> oracle_colors(const color_theory& theory, const oracle_bounds& b) {
    if (!b.colors.empty()) return b.colors;
    if (theory.domain == domain_kind::finite_enum) return theory.enum_values;
    throw cpnv_error(error_kind::oracle_unsupported, "theory " + theory.name + " needs an explicit color sub-domain");
}

std::vector<concrete_marking> enumerate_markings(const signature& sig, const oracle_bounds& b) {
    auto colors = oracle_colors(sig.theory, b);
    auto vectors = all_vectors(colors, sig.n_colors);
    std::vector<concrete_marking> out;
    concrete_marking cur;
    cur.n_colors = sig.n_colors;
    cur.default_colors = color_vector(sig.n_colors, colors.front());
    // Per place, a non-decreasing sequence of vector indices (a multiset).
    auto rec = [&](auto&& self, std::size_t place, std::size_t min_vec, int in_place) -> void {
        if (place == sig.places.size()) {
            out.push_back(cur);
            return;
        }
        self(self, place + 1, 0, 0);
        if (in_place == b.max_tokens_per_place || static_cast<int>(cur.support.size()) == b.max_support) return;
        for (std::size_t v = min_vec; v < vectors.size(); ++v) {
            token_id id = static_cast<token_id>(cur.support.size());
            cur.support[id] = {sig.places[place], vectors[v]};
            self(self, place, v, in_place + 1);
            cur.support.erase(id);
        }
    };
    rec(rec, 0, 0, 0);
    return out;
}

concrete_marking canonical(const concrete_marking& m) {
    std::vector<token_state> states;
    for (const auto& [_, st] : m.support) states.push_back(st);
    std::sort(states.begin(), states.end());
    concrete_marking out;
    out.n_colors = m.n_colors;
    out.default_colors = m.default_colors;
    for (std::size_t i = 0; i < states.size(); ++i) out.support[static_cast<token_id>(i)] = states[i];
    return out;
}

std::vector<concrete_marking> step(const cpn& net, const concrete_marking& m, const oracle_bounds& b) {
    auto vectors = all_vectors(oracle_colors(net.sig.theory, b), net.sig.n_colors);
    eval_context ctx{&net.sig.theory, &b.functions};
    std::set<concrete_marking> out;
    for (const auto& t : net.transitions) {
        check_fresh_bound(t, t.rhs.size(), b);
        auto ys = fresh_ids(m, t.rhs.size());
        auto assignments = color_assignments(vectors, t.rhs.size());
        for (const auto& xs : matchings(m, t.lhs)) {
            token_valuation theta = transition_valuation(t, xs, ys);
            for (const auto& created : assignments) {
                if (!evaluate(m, theta, {}, fix_created_colors(t, created), ctx)) continue;
                concrete_marking next = m;
                for (auto x : xs) next.support.erase(x);
                for (std::size_t j = 0; j < ys.size(); ++j) next.support[ys[j]] = {t.rhs[j], created[j]};
                out.insert(canonical(next));
            }
        }
    }
    return {out.begin(), out.end()};
}

std::vector<concrete_marking> predecessors(const cpn& net, const concrete_marking& m, const oracle_bounds& b) {
    auto vectors = all_vectors(oracle_colors(net.sig.theory, b), net.sig.n_colors);
    eval_context ctx{&net.sig.theory, &b.functions};
    std::set<concrete_marking> out;
    for (const auto& t : net.transitions) {
        check_fresh_bound(t, t.lhs.size(), b);
        auto xs = fresh_ids(m, t.lhs.size());
        auto assignments = color_assignments(vectors, t.lhs.size());
        for (const auto& ys : matchings(m, t.rhs)) {
            std::vector<color_vector> created;
            for (auto y : ys) created.push_back(m.colors_of(y));
            formula guard = fix_created_colors(t, created);
            token_valuation theta = transition_valuation(t, xs, ys);
            concrete_marking base = m;
            for (auto y : ys) base.support.erase(y);
            for (const auto& deleted : assignments) {
                concrete_marking prev = base;
                for (std::size_t i = 0; i < xs.size(); ++i) prev.support[xs[i]] = {t.lhs[i], deleted[i]};
                if (evaluate(prev, theta, {}, guard, ctx)) out.insert(canonical(prev));
            }
        }
    }
    return {out.begin(), out.end()};
}

oracle_report check_formula_vs_symbolic(const formula& phi, const cpn& net, const oracle_bounds& b,
                                        const image_options& opts) {
    if (!is_closed(phi)) throw cpnv_error(error_kind::free_variable, "oracle comparison needs a closed formula");
    formula post = post_all(phi, net, opts);
    formula pre = pre_all(phi, net, opts);
    for (const formula& f : {simplify(to_special_form(phi, net.sig.places)), post, pre})
        if (places_of(f).count(bottom_place))
            throw cpnv_error(error_kind::oracle_unsupported,
                             "formula quantifies over inactive tokens; the symbolic images leave them untouched");
    eval_context ctx{&net.sig.theory, &b.functions};
    oracle_report report;
    for (const auto& m : enumerate_markings(net.sig, b)) {
        report.markings_checked += 2;
        bool sym_post = evaluate(m, {}, {}, post, ctx);
        bool exp_post = false;
        for (const auto& prev : predecessors(net, m, b))
            if ((exp_post = evaluate(prev, {}, {}, phi, ctx))) break;
        if (sym_post != exp_post) report.discrepancies.push_back({"post", m, sym_post, exp_post});

        bool sym_pre = evaluate(m, {}, {}, pre, ctx);
        bool exp_pre = false;
        for (const auto& next : step(net, m, b))
            if ((exp_pre = evaluate(next, {}, {}, phi, ctx))) break;
        if (sym_pre != exp_pre) report.discrepancies.push_back({"pre", m, sym_pre, exp_pre});
    }
    return report;
}

std::string to_string(const oracle_report& r) {
    std::string s = std::to_string(r.markings_checked) + " checks, " + std::to_string(r.discrepancies.size()) +
                    " discrepancies\n";
    for (const auto& d : r.discrepancies)
        s += "  " + d.direction + " at " + to_string(d.marking) + ": symbolic " + (d.symbolic ? "true" : "false") +
             ", explicit " + (d.explicit_result ? "true" : "false") + "\n";
    return s;
}

}  // namespace cpnv
