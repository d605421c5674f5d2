#pragma once

#include "cpnv/cpn.hpp"
#include "cpnv/sat.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cpnv {

enum class problem_kind { hoare, bounded_reach, inductive_invariant, invariance_instance };
enum class overall_verdict { holds, fails, unknown };

std::string_view to_string(problem_kind k);
std::string_view to_string(overall_verdict v);

// A verification condition in negated form: the condition holds iff
// `formula` is unsatisfiable.
struct lemma {
    int id = 0;
    std::string transition;  // transition name, "init", "implication" or "depth <i>"
    int conjunct = -1;       // index into the CNF of the invariant, -1 if not split
    formula f;
    fragment frag = fragment::sigma0;
    verdict result = verdict::unknown;
    bool skipped = false;  // not run because an earlier lemma already failed
    double seconds = 0;
    int solver_queries = 0;
    std::optional<concrete_marking> counterexample;
};

struct verification_report {
    problem_kind kind = problem_kind::hoare;
    overall_verdict result = overall_verdict::unknown;
    std::optional<int> failing_lemma;
    std::optional<concrete_marking> counterexample;
    std::vector<lemma> lemmas;
    // (transition, conjunct) pairs discharged by place disjointness.
    int stable_pairs = 0;
    // bounded_reach: first depth at which the target was hit.
    std::optional<int> reached_depth;
    double wall_seconds = 0;
    std::vector<std::string> notes;
};

struct verifier_options {
    // Verification conditions are mostly unsatisfiable, where one query over
    // all guesses beats enumerating them.
    sat_options sat = [] {
        sat_options s;
        s.strategy = sat_strategy::single_query;
        return s;
    }();
    int threads = 0;  // 0: hardware concurrency
    bool early_abort = true;
    // Directory receiving one .smt2 file per solver query; empty disables.
    std::string emit_smt_dir;
    // bounded_reach iterates pre images from the target instead of post
    // images from the initial states.
    bool backward = false;
    // bounded_reach gives up with BudgetExceeded past this many frontier
    // formulas at one depth.
    std::size_t max_frontier = 4096;
};

// Conjuncts of the CNF of phi over its boolean skeleton (quantified
// subformulas are leaves). Falls back to the top-level conjunction when
// distribution would produce more than `cap` clauses.
std::vector<formula> cnf_conjuncts(const formula& phi, std::size_t cap = 256);

// {phi} tau {phi'}: post_tau(phi) & !phi' unsatisfiable.
verification_report check_hoare(const cpn& net, const formula& phi, const cpn_transition& tau, const formula& phi2,
                                const verifier_options& opts = {});

// Is some marking satisfying target reachable from init in at most k steps?
// Holds means unreachable within k.
verification_report bounded_reach(const cpn& net, const formula& init, const formula& target, int k,
                                  const verifier_options& opts = {});

// init & !phi unsat, and post_tau(phi) & !psi_i unsat for every transition
// tau and CNF conjunct psi_i of phi sharing a place with tau.
verification_report check_inductive_invariant(const cpn& net, const formula& init, const formula& phi,
                                              const verifier_options& opts = {});

// init => aux, aux => inv, aux inductive.
verification_report check_invariance_instance(const cpn& net, const formula& init, const formula& inv,
                                              const formula& aux, const verifier_options& opts = {});

// inv & pre~(inv) & ... & pre~^k(inv). Requires inv in Pi1 and Sigma1 guards.
formula strengthen(const cpn& net, const formula& inv, int k);

std::string to_text(const verification_report& r);
std::string to_json(const verification_report& r);
std::string to_text(const sat_result& r);
std::string to_json(const sat_result& r);

}  // namespace cpnv
