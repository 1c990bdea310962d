#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace todkit {

/// Relation between a parameter and its value. `None` only appears straight
/// out of the parser and is canonicalized to `EqualTo`.
enum class Operator { EqualTo, AtLeast, AtMost, OneOf, Not, None };

const char* to_string(Operator op) noexcept;
std::optional<Operator> parse_operator(std::string_view tag) noexcept;

struct ParamTriple {
    std::string name;
    Operator op = Operator::None;
    /// One element, except for OneOf which may carry several.
    std::vector<std::string> values;

    /// Values joined with '|'.
    std::string value_text() const;

    friend bool operator==(const ParamTriple&, const ParamTriple&) = default;
};

struct Span {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive
    friend bool operator==(const Span&, const Span&) = default;
};

struct ApiCall {
    std::string method;
    std::vector<ParamTriple> params;
    Span raw_span;
    std::size_t attempt_index = 0;

    const ParamTriple* find(std::string_view name) const;
};

/// Method and parameters equal; span and attempt index ignored.
bool same_call(const ApiCall& a, const ApiCall& b);

inline constexpr std::string_view kCallPrefix = "APICall(";
inline constexpr std::size_t kMaxCallLength = 4096;

/// First well-formed call in `text`, or nullopt when no call prefix is
/// present. Throws ParseError when the prefix occurs but none of the
/// occurrences completes into a well-formed call within kMaxCallLength bytes.
std::optional<ApiCall> extract_api_call(std::string_view text);

/// Parses a call that must start exactly at `text[0]`; trailing text is
/// ignored. nullopt when not well-formed.
std::optional<ApiCall> parse_call_prefix(std::string_view text);

/// Canonical single-line rendering. Operator EqualTo/None is elided.
std::string serialize(const ApiCall& call);

/// None -> EqualTo, values trimmed, params sorted by name key.
ApiCall canonicalize(ApiCall call);

}  // namespace todkit
