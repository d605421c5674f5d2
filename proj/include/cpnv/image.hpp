#pragma once

#include "cpnv/cpn.hpp"
#include "cpnv/formula.hpp"

#include <map>
#include <string>
#include <vector>

namespace cpnv {

// Deletion of the tokens bound to `zs`; loc gives their places and col names
// the color variables standing for their colors.
struct deletion_context {
    std::vector<std::string> zs;
    std::map<std::string, std::string> loc;
    color_replacement col;
};

struct addition_context {
    std::vector<std::string> zs;
    std::map<std::string, std::string> loc;
};

// Knobs for mutation testing of the oracle harness; never set in production.
struct image_options {
    bool drop_oplus_disequalities = false;
};

// phi is evaluated on a marking that still holds the deleted tokens; the
// result says the same about the marking without them. Result is simplified.
formula ominus(const formula& phi, const deletion_context& ctx);

// phi is evaluated on a marking without the added tokens; the result says the
// same about the marking that has them.
formula oplus(const formula& phi, const addition_context& ctx, const image_options& opts = {});

// exists y in q . exists c . ((phi & guard) ominus x) oplus y
formula post_formula(const formula& phi, const cpn_transition& t, const signature& sig,
                     const image_options& opts = {});

// exists x in p . exists c . ((phi oplus x) ominus y) & guard[c/d(y)]
formula pre_formula(const formula& phi, const cpn_transition& t, const signature& sig,
                    const image_options& opts = {});

formula post_all(const formula& phi, const cpn& net, const image_options& opts = {});
formula pre_all(const formula& phi, const cpn& net, const image_options& opts = {});

// !pre_all(!phi): the states all of whose successors satisfy phi. Requires a
// Pi1 formula and a net whose guards are all in Sigma1.
formula pre_tilde(const formula& phi, const cpn& net);

// Names of the color variables introduced for token `var`'s colors.
std::string color_var_name(int k, const std::string& var);

}  // namespace cpnv
