#pragma once

#include "cpnv/color_theory.hpp"
#include "cpnv/formula.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cpnv {

using token_id = std::int64_t;
using color_vector = std::vector<value>;

struct token_state {
    std::string place;
    color_vector colors;
    friend bool operator==(const token_state&, const token_state&) = default;
    friend auto operator<=>(const token_state&, const token_state&) = default;
};

// Finite-support marking: tokens outside `support` sit at the inactive place
// and all carry `default_colors`.
struct concrete_marking {
    int n_colors = 1;
    std::map<token_id, token_state> support;
    color_vector default_colors;

    const std::string& place_of(token_id t) const;
    const color_vector& colors_of(token_id t) const;
    token_id smallest_unused(const std::vector<token_id>& also_taken = {}) const;

    friend bool operator==(const concrete_marking&, const concrete_marking&) = default;
    friend auto operator<=>(const concrete_marking&, const concrete_marking&) = default;
};

std::string to_string(const concrete_marking& m);

using token_valuation = std::map<std::string, token_id>;
using color_valuation = std::map<std::string, value>;

struct eval_context {
    const color_theory* theory = nullptr;
    const function_table* functions = nullptr;  // interpretation of uninterpreted symbols
};

value evaluate_term(const concrete_marking& m, const token_valuation& theta, const color_valuation& nu,
                    const color_term& t, const eval_context& ctx);

// M |=_{theta,nu} phi. Quantification over the inactive place (and unguarded
// token quantification) is exact: inactive tokens are indistinguishable apart
// from their identity, so one fresh representative suffices. Color quantifiers
// need a finite-enum theory. Throws OracleUnsupported otherwise.
bool evaluate(const concrete_marking& m, const token_valuation& theta, const color_valuation& nu, const formula& phi,
              const eval_context& ctx);

}  // namespace cpnv
