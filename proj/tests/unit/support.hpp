#pragma once

#include "cpnv/color_theory.hpp"
#include "cpnv/formula.hpp"
#include "cpnv/parser.hpp"

#include <string>
#include <vector>

namespace cpnv::testing {

inline signature make_sig(const std::string& theory, std::vector<std::string> places, int n_colors,
                          std::vector<symbol_decl> functions = {}) {
    auto th = find_builtin_theory(theory);
    return signature{th->with_functions(functions), std::move(places), n_colors};
}

inline signature pqr_idl() { return make_sig("idl", {"p", "q", "r"}, 1); }
inline signature pqr_enum() { return make_sig("enum3", {"p", "q", "r"}, 1); }

inline formula parse(const std::string& text, const signature& sig) { return parse_formula(text, sig); }

}  // namespace cpnv::testing
