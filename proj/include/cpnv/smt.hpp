#pragma once

#include "cpnv/color_theory.hpp"
#include "cpnv/formula.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cpnv {

enum class verdict { sat, unsat, unknown, error };
std::string_view to_string(verdict v);

struct solver_config {
    std::string executable = "z3";
    std::vector<std::string> flags = {"-in"};
    double timeout_seconds = 120.0;
    std::string logic_override;
    bool produce_models = true;
};

// Executable taken from CPNV_SOLVER when set (flags stay those of z3 unless
// CPNV_SOLVER_FLAGS is set too, whitespace separated).
solver_config default_solver_config();

struct solver_outcome {
    verdict result = verdict::unknown;
    std::optional<std::map<std::string, value>> model;
    std::string transcript;
    double wall_seconds = 0;
};

// SMT-LIB v2 script for a formula over colors only: set-logic, declarations
// of free color variables and used uninterpreted functions, one assert,
// check-sat and optionally get-model. Deterministic in its inputs.
std::string emit_smt(const formula& phi, const color_theory& theory, bool produce_models = true,
                     const std::string& logic_override = {});

// One solver process per query. Timeout yields Unknown. Throws SpawnFailure
// or ProtocolError.
solver_outcome run_query(const std::string& script, const solver_config& cfg);

// Caps the number of solver processes alive at once (default: hardware threads).
void set_solver_parallelism(int n);

}  // namespace cpnv
