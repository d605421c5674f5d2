#pragma once

// Random formulas and nets for property tests.

#include "cpnv/cpn.hpp"
#include "cpnv/formula.hpp"
#include "cpnv/parser.hpp"

#include <random>
#include <string>
#include <vector>

namespace cpnv::testing {

class random_cml {
public:
    random_cml(unsigned seed, signature sig) : rng_(seed), sig_(std::move(sig)) {}

    std::mt19937& rng() { return rng_; }
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
    const std::string& place() { return sig_.places[uniform(0, static_cast<int>(sig_.places.size()) - 1)]; }

    // Quantifier-free matrix over the given token variables.
    formula matrix(const std::vector<std::string>& vars, int depth) {
        if (depth == 0 || coin(0.3)) return atom(vars);
        std::vector<formula> kids;
        int n = uniform(2, 3);
        for (int i = 0; i < n; ++i) kids.push_back(matrix(vars, depth - 1));
        return coin() ? mk_and(std::move(kids)) : mk_or(std::move(kids));
    }

    formula atom(const std::vector<std::string>& vars) {
        if (vars.empty()) return coin() ? mk_true() : mk_false();
        const std::string& a = vars[uniform(0, static_cast<int>(vars.size()) - 1)];
        const std::string& b = vars[uniform(0, static_cast<int>(vars.size()) - 1)];
        formula f;
        int kind = uniform(0, 3);
        int k = uniform(1, sig_.n_colors);
        if (kind == 0) {
            f = mk_token_eq(a, b);
        } else {
            static const char* rel[] = {"=", "!=", "<", "<="};
            color_term lhs = make_token_color(k, a);
            color_term rhs = kind == 1 ? make_token_color(uniform(1, sig_.n_colors), b) : make_literal(uniform(0, 2));
            f = mk_pred(rel[uniform(0, 3)], {lhs, rhs});
        }
        return coin(0.25) ? mk_not(f) : f;
    }

    // exists x1..xn in places . forall y1..ym in places . matrix
    formula prenex_sigma2(int max_ex = 3, int max_all = 2, std::vector<std::string> outer = {}) {
        int n_ex = uniform(0, max_ex), n_all = uniform(0, max_all);
        std::vector<std::pair<std::string, std::string>> ex, all;
        std::vector<std::string> vars = outer;
        for (int i = 0; i < n_ex; ++i) {
            ex.push_back({"x" + std::to_string(counter_++), place()});
            vars.push_back(ex.back().first);
        }
        for (int i = 0; i < n_all; ++i) {
            all.push_back({"y" + std::to_string(counter_++), place()});
            vars.push_back(all.back().first);
        }
        formula f = matrix(vars, 2);
        for (auto it = all.rbegin(); it != all.rend(); ++it) f = mk_forall_token_in(it->first, it->second, f);
        for (auto it = ex.rbegin(); it != ex.rend(); ++it) f = mk_exists_token_in(it->first, it->second, f);
        return f;
    }

    // Boolean combination of prenex Sigma2 parts (still Sigma2 when negations
    // only reach Sigma1/Pi1 parts, which is what this produces).
    formula sigma2() {
        if (coin(0.6)) return prenex_sigma2();
        return mk_and(prenex_sigma2(2, 1), prenex_sigma2(2, 1));
    }

    formula pi1() {
        int n = uniform(1, 2);
        std::vector<std::pair<std::string, std::string>> all;
        std::vector<std::string> vars;
        for (int i = 0; i < n; ++i) {
            all.push_back({"y" + std::to_string(counter_++), place()});
            vars.push_back(all.back().first);
        }
        formula f = matrix(vars, 2);
        for (auto it = all.rbegin(); it != all.rend(); ++it) f = mk_forall_token_in(it->first, it->second, f);
        return coin(0.3) ? mk_and(f, prenex_sigma2(0, 1)) : f;
    }

    // A net over the signature with 1-2 transitions; guards mention the
    // transition variables and sometimes a guarded quantifier.
    cpn net(bool sigma1_guards) {
        cpn n;
        n.sig = sig_;
        int transitions = uniform(1, 2);
        for (int i = 0; i < transitions; ++i) {
            cpn_transition t;
            t.name = "t" + std::to_string(i);
            int lhs = uniform(0, 2), rhs = uniform(lhs == 0 ? 1 : 0, 2);
            for (int j = 0; j < lhs; ++j) t.lhs.push_back(place());
            for (int j = 0; j < rhs; ++j) t.rhs.push_back(place());
            std::vector<std::string> vars = t.lhs_vars();
            for (const auto& y : t.rhs_vars()) vars.push_back(y);
            std::vector<formula> parts;
            for (const auto& v : vars) parts.push_back(mk_pred("<=", {make_literal(0), make_token_color(1, v)}));
            parts.push_back(matrix(vars, 1));
            int q = uniform(0, 2);
            std::string z = "z" + std::to_string(counter_++);
            auto with_z = vars;
            with_z.push_back(z);
            if (q == 1) parts.push_back(mk_exists_token_in(z, place(), matrix(with_z, 1)));
            if (q == 2 && !sigma1_guards) parts.push_back(mk_forall_token_in(z, place(), matrix(with_z, 1)));
            t.guard = mk_and(std::move(parts));
            n.transitions.push_back(std::move(t));
        }
        return n;
    }

private:
    std::mt19937 rng_;
    signature sig_;
    int counter_ = 0;
};

}  // namespace cpnv::testing
