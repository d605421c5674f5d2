#pragma once

#include "cpnv/errors.hpp"
#include "cpnv/formula.hpp"
#include "cpnv/normal_forms.hpp"
#include "cpnv/parser.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpnv {

// p1..pn -> q1..qm : guard. Token variables are positional: x_i is the token
// taken from lhs[i-1], y_j the one put into rhs[j-1].
struct cpn_transition {
    std::string name;
    std::vector<std::string> lhs;
    std::vector<std::string> rhs;
    formula guard;
    int line = 0;

    std::vector<std::string> lhs_vars() const;
    std::vector<std::string> rhs_vars() const;
};

struct cpn {
    signature sig;
    std::vector<cpn_transition> transitions;

    const cpn_transition* find(std::string_view name) const;
};

struct diagnostic {
    error_kind kind;
    std::string message;
};

struct validation_report {
    std::vector<diagnostic> diagnostics;
    fragment guard_class = fragment::sigma0;  // join of all guard fragments
    bool sigma1_class = true;                  // every guard within Sigma1

    bool ok() const { return diagnostics.empty(); }
};

validation_report validate(const cpn& net);
// Throws the first diagnostic as a cpnv_error.
void require_valid(const cpn& net);

fragment fragment_join(fragment a, fragment b);

// Model file:
//   theory idl; colors 2; places r1, w, x; functions f:1, g:1;
//   trans w1: w1, w -> w2, w : d2(x2) < 0 & phi_id(1);
cpn parse_model(std::string_view text);

// Formula file: an optional header (theory/colors/places/functions statements,
// each terminated by ';') followed by one formula. Without a header the
// signature must be supplied.
struct formula_file {
    signature sig;
    formula f;
};
formula_file parse_formula_file(std::string_view text, const signature* default_sig);

std::string read_file(const std::string& path);

}  // namespace cpnv
