#pragma once

#include "cpnv/formula.hpp"
#include "cpnv/marking.hpp"
#include "cpnv/normal_forms.hpp"
#include "cpnv/parser.hpp"
#include "cpnv/smt.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cpnv {

// A guessed token of the small model: representative name and its place.
struct guessed_token {
    std::string name;
    std::string place;
    friend bool operator==(const guessed_token&, const guessed_token&) = default;
};

struct reduction_trace {
    fragment input_fragment = fragment::sigma0;
    std::optional<formula> upward_closure;
    // Representatives of the guess that decided the query (one per
    // equivalence class, placed by sigma).
    std::vector<guessed_token> guessed_structure;
    std::optional<formula> sigma0;
    verdict solver_verdict = verdict::unknown;
    int existential_token_vars = 0;
    int guesses = 0;
    int solver_queries = 0;
    std::vector<std::string> warnings;
};

struct sat_result {
    verdict result = verdict::unknown;
    std::optional<concrete_marking> witness;
    reduction_trace trace;
};

enum class sat_strategy {
    lazy,          // one solver query per guessed structure, smallest first
    single_query,  // all guesses in one query, token presence left to the solver
};

struct sat_options {
    solver_config solver = default_solver_config();
    sat_strategy strategy = sat_strategy::lazy;
    bool record_upward_closure = false;
    // Upper bound on guessed structures before giving up with BudgetExceeded.
    long max_guesses = 200000;
    // Called with every script sent to the solver.
    std::function<void(const std::string&)> on_query;
};

// For phi in Sigma2 (closed, special or prenex form): the Sigma1 formula
// obtained by instantiating the universal token prefix with every map from
// universal to existential token variables. Guards are reconciled: a branch
// mapping y in q to x in p with p != q is dropped.
formula upward_closure(const formula& phi);

// For phi in Sigma1 (closed): an equisatisfiable Sigma0 formula, the
// disjunction over guessed structures of the existentially closed color
// constraints, with d_k(x) renamed to s<k>_<representative>.
formula sigma1_to_sigma0(const formula& phi, const std::vector<std::string>& places);

// Decides satisfiability of a closed formula up to Sigma2. Pi2 and above
// raise FragmentUnsupported (undecidable). Unknown solver answers are
// reported as verdict::unknown.
sat_result check_sat(const formula& phi, const signature& sig, const sat_options& opts = {});

}  // namespace cpnv
