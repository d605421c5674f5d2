#pragma once

#include "cpnv/color_theory.hpp"
#include "cpnv/formula.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cpnv {

// What a formula may talk about: color logic, places, number of colors.
struct signature {
    color_theory theory;
    std::vector<std::string> places;
    int n_colors = 1;
};

struct parse_options {
    // Free identifiers that denote tokens (transition variables x1.., y1..).
    std::set<std::string> free_tokens;
    // Expand phi_id(i) into the color-copy conjunction for y_i/x_i.
    bool allow_phi_id = false;
    // The inactive place is internal; only round-trip tests of internal
    // formulas need to read it back.
    bool allow_bottom = false;
    // Added to line numbers in diagnostics (formulas embedded in model files).
    int first_line = 1;
};

// Concrete syntax:
//   true false  x = y  x != y  p(x)  dK(x)  t1 <= t2 < t3 (chains)
//   ! & | => <=>  exists x, y in p . F  forall a in p, b in q . F  forall x . F
//   exists color z . F
// Bound variables are renamed apart. Throws cpnv_error.
formula parse_formula(std::string_view text, const signature& sig, const parse_options& opts = {});

// The color-copy conjunction d1(y_i) = d1(x_i) & ... & dN(y_i) = dN(x_i).
formula phi_id(int i, int n_colors);

}  // namespace cpnv
