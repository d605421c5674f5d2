#pragma once

#include "cpnv/cpn.hpp"
#include "cpnv/image.hpp"
#include "cpnv/marking.hpp"

#include <string>
#include <vector>

namespace cpnv {

// Explicit-state search space. Markings are enumerated up to renaming of
// token ids, which formulas cannot observe.
struct oracle_bounds {
    int max_tokens_per_place = 2;
    int max_support = 3;
    // Candidate colors; empty means the whole finite-enum domain.
    std::vector<value> colors;
    int max_fresh_per_step = 3;
    function_table functions;
};

// Colors the oracle ranges over: bounds.colors, or the theory's enum domain.
std::vector<value> oracle_colors(const color_theory& theory, const oracle_bounds& b);

// Every marking within bounds, one per isomorphism class, with token ids
// 0..n-1 and the first candidate color as the inactive default.
std::vector<concrete_marking> enumerate_markings(const signature& sig, const oracle_bounds& b);

// Renumbers tokens in (place, colors) order so isomorphic markings compare equal.
concrete_marking canonical(const concrete_marking& m);

// All M' with M -> M' by one transition; created tokens take the smallest
// unused ids and every candidate color vector. Guards are evaluated on M with
// d_k(y_j) replaced by the created colors.
std::vector<concrete_marking> step(const cpn& net, const concrete_marking& m, const oracle_bounds& b);

// All M with M -> M' (deleted tokens get fresh ids and every candidate color).
std::vector<concrete_marking> predecessors(const cpn& net, const concrete_marking& m, const oracle_bounds& b);

struct oracle_discrepancy {
    std::string direction;  // "post" or "pre"
    concrete_marking marking;
    bool symbolic = false;
    bool explicit_result = false;
};

struct oracle_report {
    long markings_checked = 0;
    std::vector<oracle_discrepancy> discrepancies;
    bool ok() const { return discrepancies.empty(); }
};

// For every marking M' in bounds: M' |= post_all(phi) iff some predecessor of
// M' satisfies phi; for every M in bounds: M |= pre_all(phi) iff some
// successor of M satisfies phi.
oracle_report check_formula_vs_symbolic(const formula& phi, const cpn& net, const oracle_bounds& b,
                                        const image_options& opts = {});

std::string to_string(const oracle_report& r);

}  // namespace cpnv
