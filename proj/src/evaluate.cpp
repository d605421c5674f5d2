#include "cpnv/errors.hpp"
#include "cpnv/marking.hpp"

#include <algorithm>

namespace cpnv {

const std::string& concrete_marking::place_of(token_id t) const {
    auto it = support.find(t);
    return it == support.end() ? bottom_place : it->second.place;
}

const color_vector& concrete_marking::colors_of(token_id t) const {
    auto it = support.find(t);
    return it == support.end() ? default_colors : it->second.colors;
}

token_id concrete_marking::smallest_unused(const std::vector<token_id>& also_taken) const {
    for (token_id id = 0;; ++id)
        if (!support.count(id) && std::find(also_taken.begin(), also_taken.end(), id) == also_taken.end()) return id;
}

std::string to_string(const concrete_marking& m) {
    std::string s = "{";
    bool first = true;
    for (const auto& [id, st] : m.support) {
        if (!first) s += ", ";
        first = false;
        s += "t" + std::to_string(id) + "@" + st.place + "(";
        for (std::size_t k = 0; k < st.colors.size(); ++k) s += (k ? "," : "") + st.colors[k].to_string();
        s += ")";
    }
    return s + "}";
}

value evaluate_term(const concrete_marking& m, const token_valuation& theta, const color_valuation& nu,
                    const color_term& t, const eval_context& ctx) {
    switch (t->k) {
    case color_term_node::kind::literal: return t->lit;
    case color_term_node::kind::var: {
        auto it = nu.find(t->name);
        if (it == nu.end()) throw cpnv_error(error_kind::free_variable, "color variable " + t->name + " unvalued");
        return it->second;
    }
    case color_term_node::kind::token_color: {
        auto it = theta.find(t->name);
        if (it == theta.end()) throw cpnv_error(error_kind::free_variable, "token variable " + t->name + " unvalued");
        const auto& cols = m.colors_of(it->second);
        if (t->index < 1 || t->index > static_cast<int>(cols.size()))
            throw cpnv_error(error_kind::color_index_out_of_range, to_string(t));
        return cols[t->index - 1];
    }
    case color_term_node::kind::apply: {
        std::vector<value> args;
        for (const auto& a : t->args) args.push_back(evaluate_term(m, theta, nu, a, ctx));
        if (ctx.functions) {
            auto it = ctx.functions->find(t->name);
            if (it != ctx.functions->end()) return it->second(args);
        }
        if (auto v = apply_builtin_operation(t->name, args)) return *v;
        throw cpnv_error(error_kind::oracle_unsupported, "no interpretation for operation " + t->name);
    }
    }
    return {};
}

namespace {

struct evaluator {
    const concrete_marking& m;
    const eval_context& ctx;
    token_valuation theta;
    color_valuation nu;

    std::vector<token_id> candidates(const formula& q) const {
        std::vector<token_id> out;
        std::vector<token_id> bound;
        for (const auto& [_, id] : theta) bound.push_back(id);
        bool bottom = q->place.empty() || q->place == bottom_place;
        for (const auto& [id, st] : m.support)
            if (q->place.empty() || st.place == q->place) out.push_back(id);
        if (bottom) {
            for (token_id id : bound)
                if (!m.support.count(id) && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
            out.push_back(m.smallest_unused(bound));
        }
        return out;
    }

    bool quantify(const formula& q, bool want) {
        // want = true for exists (looking for a witness), false for forall.
        const formula& body = q->kids[0];
        if (q->sort == var_sort::color) {
            if (!ctx.theory || ctx.theory->domain != domain_kind::finite_enum)
                throw cpnv_error(error_kind::oracle_unsupported, "color quantifier over an infinite domain");
            auto saved = nu.find(q->var) == nu.end() ? std::optional<value>{} : nu[q->var];
            bool result = !want;
            for (const auto& v : ctx.theory->enum_values) {
                nu[q->var] = v;
                if (eval(body) == want) {
                    result = want;
                    break;
                }
            }
            if (saved)
                nu[q->var] = *saved;
            else
                nu.erase(q->var);
            return result;
        }
        auto saved = theta.find(q->var) == theta.end() ? std::optional<token_id>{} : theta[q->var];
        bool result = !want;
        for (token_id id : candidates(q)) {
            theta[q->var] = id;
            if (eval(body) == want) {
                result = want;
                break;
            }
        }
        if (saved)
            theta[q->var] = *saved;
        else
            theta.erase(q->var);
        return result;
    }

    token_id lookup(const std::string& x) const {
        auto it = theta.find(x);
        if (it == theta.end()) throw cpnv_error(error_kind::free_variable, "token variable " + x + " unvalued");
        return it->second;
    }

    bool eval(const formula& f) {
        switch (f->k) {
        case fk::tt: return true;
        case fk::ff: return false;
        case fk::token_eq: return lookup(f->var) == lookup(f->var2);
        case fk::place: return m.place_of(lookup(f->var)) == f->place;
        case fk::pred: {
            std::vector<value> args;
            for (const auto& t : f->atom.args) args.push_back(evaluate_term(m, theta, nu, t, ctx));
            if (auto b = apply_builtin_predicate(f->atom.predicate, args)) return *b;
            throw cpnv_error(error_kind::oracle_unsupported, "no interpretation for predicate " + f->atom.predicate);
        }
        case fk::not_: return !eval(f->kids[0]);
        case fk::and_:
            for (const auto& k : f->kids)
                if (!eval(k)) return false;
            return true;
        case fk::or_:
            for (const auto& k : f->kids)
                if (eval(k)) return true;
            return false;
        case fk::exists: return quantify(f, true);
        case fk::forall: return quantify(f, false);
        }
        return false;
    }
};

}  // namespace

bool evaluate(const concrete_marking& m, const token_valuation& theta, const color_valuation& nu, const formula& phi,
              const eval_context& ctx) {
    evaluator e{m, ctx, theta, nu};
    return e.eval(phi);
}

}  // namespace cpnv
