#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "todkit/apicall.hpp"
#include "todkit/validator.hpp"

namespace todkit {

enum class Role { User, System, ApiCall, Feedback, SearchResults };

const char* to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;

struct Attempt {
    std::string raw;
    ValidationVerdict verdict;
};

/// One recorded turn. api_call, feedback and search_results turns belong to
/// the system step that follows the preceding user turn.
struct Turn {
    Role role = Role::User;
    std::string text;
    std::optional<ApiCall> call;
    std::vector<Attempt> attempt_trail;
    std::uint64_t timestamp = 0;
};

enum class SessionStatus { Completed, Truncated, Stuck, BackendFailed };

const char* to_string(SessionStatus s) noexcept;
std::optional<SessionStatus> parse_status(std::string_view s) noexcept;

struct DialogTranscript {
    std::string dialog_id;
    std::vector<std::string> domains;
    std::vector<Turn> turns;
    std::string config_fingerprint;
    SessionStatus status = SessionStatus::Completed;

    /// Calls carried by api_call turns, in order.
    std::vector<ApiCall> calls() const;
    std::size_t count(Role role) const;
    /// Texts of plain system turns (api_call, feedback and search turns excluded).
    std::vector<std::string> system_texts() const;
};

/// Top-level roles alternate user/system, where a system step is any run of
/// system-side turns (api_call, feedback, search_results, system).
bool roles_alternate(const std::vector<Turn>& turns);

/// Prompt rendering of a history: "User: ..." / "System: ..." /
/// "Search Results: [...]" lines. Feedback turns are omitted.
std::string render_history(const std::vector<Turn>& turns);

nlohmann::ordered_json turn_to_json(const std::string& dialog_id, const Turn& turn);
Turn turn_from_json(const nlohmann::json& j);

/// One line per turn.
void write_transcripts(std::ostream& out, const std::vector<DialogTranscript>& transcripts);
void write_transcripts_file(const std::filesystem::path& path,
                            const std::vector<DialogTranscript>& transcripts);
/// Groups lines by dialog_id in order of first appearance. Throws
/// MalformedDocument on an unparsable line.
std::vector<DialogTranscript> read_transcripts(std::istream& in);
std::vector<DialogTranscript> read_transcripts_file(const std::filesystem::path& path);

}  // namespace todkit
