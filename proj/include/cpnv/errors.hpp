#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpnv {

enum class error_kind {
    syntax_error,
    undeclared_symbol,
    undeclared_place,
    color_index_out_of_range,
    arity_mismatch,
    free_variable,
    not_special_form,
    variable_clash,
    fragment_unsupported,
    oracle_unsupported,
    guard_free_var_mismatch,
    rhs_var_misuse,
    guard_fragment_too_high,
    unsupported_construct,
    spawn_failure,
    protocol_error,
    solver_failure,
    budget_exceeded,
    invalid_argument,
};

std::string_view to_string(error_kind kind);

// All library failures are reported through this exception; `kind` lets
// callers (tests, the CLI exit-code mapping) dispatch without string matching.
class cpnv_error : public std::runtime_error {
public:
    cpnv_error(error_kind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    error_kind kind() const noexcept { return kind_; }

private:
    error_kind kind_;
};

}  // namespace cpnv
