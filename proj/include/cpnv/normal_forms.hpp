#pragma once

#include "cpnv/formula.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cpnv {

enum class fragment { sigma0, sigma1, pi1, bsigma1, sigma2, pi2, higher };

std::string_view to_string(fragment f);

// Inclusion order of the hierarchy: Sigma0 below everything, Sigma1/Pi1 below
// BSigma1, BSigma1 below Sigma2 and Pi2, and all of them below Higher.
bool fragment_leq(fragment a, fragment b);
fragment dual(fragment f);

// Negations pushed down to atoms; quantifiers flip under negation.
formula to_nnf(const formula& f);

// Constant folding: absorption, flattening, dedupe modulo renaming,
// complementary literals, trivial (in)equalities, vacuous quantifiers.
formula simplify(const formula& f);

bool is_special_form(const formula& f);

// Every token quantifier becomes guarded and place atoms disappear. The input
// must be closed.
formula to_special_form(const formula& f, const std::vector<std::string>& places);

// Variant for open formulas (transition guards): free token variables listed in
// `locations` have known places, so their place atoms fold to constants. Place
// atoms over other free variables raise FreeVariable.
formula to_special_form(const formula& f, const std::vector<std::string>& places,
                        const std::map<std::string, std::string>& locations);

// Prenex form with the quantifier order chosen to minimise token alternations.
// Guards become place atoms in the matrix.
formula to_pnf(const formula& f);

// NNF with quantifiers pushed inward over junctions. A guarded quantifier
// whose variable does not occur keeps only an emptiness test of its place.
formula miniscope(const formula& f);

fragment classify_fragment(const formula& f);

}  // namespace cpnv
