#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace todkit::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Identifier key used for every name comparison: ASCII case-folded with all
/// spaces, underscores and hyphens removed, so "GetWeather", "get_weather"
/// and "get weather" compare equal.
std::string name_key(std::string_view name);

/// Human phrase for an identifier: "pickup_time" -> "pickup time".
std::string name_phrase(std::string_view name);

/// Lowercase, punctuation removed, whitespace collapsed. Input to fuzzy scoring.
std::string fuzzy_normalize(std::string_view s);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - distance / max(len). Two empty strings are identical (1.0).
double similarity(std::string_view a, std::string_view b);

/// Names from `candidates` within `max_distance` edits of `name` (compared by
/// name_key), nearest first, ties by candidate order; at most `limit`.
std::vector<std::string> nearest_names(std::string_view name,
                                       const std::vector<std::string>& candidates,
                                       std::size_t max_distance = 3,
                                       std::size_t limit = 3);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// True when s contains `needle` (already lowercase) bounded by non-word
/// characters on both sides. Case-insensitive on s.
bool contains_word(std::string_view s, std::string_view needle);

/// Position of the first word-bounded occurrence or npos.
std::size_t find_word(std::string_view s, std::string_view needle);

}  // namespace todkit::text
