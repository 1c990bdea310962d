#pragma once

#include <string>
#include <vector>

#include "todkit/apicall.hpp"
#include "todkit/schema.hpp"

namespace todkit {

enum class ErrorKind { UnknownMethod, UnknownSlot, MissingRequiredSlot };

const char* to_string(ErrorKind kind) noexcept;

struct ValidationError {
    ErrorKind kind;
    std::string method;
    /// Empty for UnknownMethod; the offending parameter names otherwise.
    std::vector<std::string> offending_names;
    /// Nearest valid schema names (at most 3, edit distance <= 3).
    std::vector<std::string> suggestions;

    friend bool operator==(const ValidationError&, const ValidationError&) = default;
};

struct ValidationVerdict {
    bool ok = true;
    std::vector<ValidationError> errors;

    friend bool operator==(const ValidationVerdict&, const ValidationVerdict&) = default;
};

/// Checks method, parameter names and required parameters. Parameter values
/// and operators are not inspected. An unknown method skips the slot checks.
ValidationVerdict validate(const ApiCall& call, const SchemaRegistry& registry);

/// Deterministic correction message for a failing verdict. Throws
/// ContractViolation when verdict.ok is true.
std::string feedback_message(const ValidationVerdict& verdict, const SchemaRegistry& registry);

}  // namespace todkit
