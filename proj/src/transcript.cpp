#include "todkit/transcript.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "todkit/error.hpp"

namespace todkit {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Role role) noexcept {
    switch (role) {
        case Role::User: return "user";
        case Role::System: return "system";
        case Role::ApiCall: return "api_call";
        case Role::Feedback: return "feedback";
        case Role::SearchResults: return "search_results";
    }
    return "?";
}

std::optional<Role> parse_role(std::string_view s) noexcept {
    for (Role r : {Role::User, Role::System, Role::ApiCall, Role::Feedback, Role::SearchResults})
        if (s == to_string(r)) return r;
    return std::nullopt;
}

const char* to_string(SessionStatus s) noexcept {
    switch (s) {
        case SessionStatus::Completed: return "completed";
        case SessionStatus::Truncated: return "truncated";
        case SessionStatus::Stuck: return "stuck";
        case SessionStatus::BackendFailed: return "backend_failed";
    }
    return "?";
}

std::optional<SessionStatus> parse_status(std::string_view s) noexcept {
    for (auto st : {SessionStatus::Completed, SessionStatus::Truncated, SessionStatus::Stuck,
                    SessionStatus::BackendFailed})
        if (s == to_string(st)) return st;
    return std::nullopt;
}

std::vector<ApiCall> DialogTranscript::calls() const {
    std::vector<ApiCall> out;
    for (const auto& t : turns)
        if (t.role == Role::ApiCall && t.call) out.push_back(*t.call);
    return out;
}

std::size_t DialogTranscript::count(Role role) const {
    std::size_t n = 0;
    for (const auto& t : turns) n += t.role == role ? 1 : 0;
    return n;
}

std::vector<std::string> DialogTranscript::system_texts() const {
    std::vector<std::string> out;
    for (const auto& t : turns)
        if (t.role == Role::System) out.push_back(t.text);
    return out;
}

bool roles_alternate(const std::vector<Turn>& turns) {
    std::optional<bool> last_user;
    for (const auto& t : turns) {
        const bool is_user = t.role == Role::User;
        if (last_user && *last_user == is_user && is_user) return false;
        if (last_user && !*last_user && !is_user) continue;  // same system step
        last_user = is_user;
    }
    return true;
}

std::string render_history(const std::vector<Turn>& turns) {
    std::string out;
    for (const auto& t : turns) {
        switch (t.role) {
            case Role::User: out += "User: " + t.text + "\n"; break;
            case Role::System:
            case Role::ApiCall: out += "System: " + t.text + "\n"; break;
            case Role::SearchResults: out += t.text + "\n"; break;
            case Role::Feedback: break;
        }
    }
    return out;
}

namespace {

ordered_json verdict_errors_json(const ValidationVerdict& v) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : v.errors) {
        ordered_json j;
        j["kind"] = to_string(e.kind);
        j["method"] = e.method;
        j["names"] = e.offending_names;
        j["suggestions"] = e.suggestions;
        arr.push_back(std::move(j));
    }
    return arr;
}

ValidationVerdict verdict_from_json(const json& j) {
    ValidationVerdict v;
    v.ok = j.at("ok").get<bool>();
    for (const auto& e : j.at("errors")) {
        ValidationError err;
        const auto kind = e.at("kind").get<std::string>();
        if (kind == "UnknownMethod") err.kind = ErrorKind::UnknownMethod;
        else if (kind == "UnknownSlot") err.kind = ErrorKind::UnknownSlot;
        else if (kind == "MissingRequiredSlot") err.kind = ErrorKind::MissingRequiredSlot;
        else throw MalformedDocument("unknown verdict kind " + kind);
        err.method = e.at("method").get<std::string>();
        err.offending_names = e.at("names").get<std::vector<std::string>>();
        err.suggestions = e.at("suggestions").get<std::vector<std::string>>();
        v.errors.push_back(std::move(err));
    }
    return v;
}

}  // namespace

ordered_json turn_to_json(const std::string& dialog_id, const Turn& turn) {
    ordered_json j;
    j["dialog_id"] = dialog_id;
    j["role"] = to_string(turn.role);
    j["text"] = turn.text;
    if (turn.call) {
        j["call"] = serialize(canonicalize(*turn.call));
        j["attempt_index"] = turn.call->attempt_index;
    }
    if (!turn.attempt_trail.empty()) {
        ordered_json trail = ordered_json::array();
        for (const auto& a : turn.attempt_trail) {
            ordered_json aj;
            aj["raw"] = a.raw;
            aj["ok"] = a.verdict.ok;
            aj["errors"] = verdict_errors_json(a.verdict);
            trail.push_back(std::move(aj));
        }
        j["attempt_trail"] = std::move(trail);
        std::vector<std::string> kinds;
        for (const auto& e : turn.attempt_trail.back().verdict.errors) kinds.push_back(to_string(e.kind));
        j["verdict_kinds"] = kinds;
    }
    j["timestamp"] = turn.timestamp;
    return j;
}

Turn turn_from_json(const json& j) {
    Turn t;
    const auto role = parse_role(j.at("role").get<std::string>());
    if (!role) throw MalformedDocument("unknown role " + j.at("role").dump());
    t.role = *role;
    t.text = j.at("text").get<std::string>();
    if (auto it = j.find("call"); it != j.end() && !it->is_null()) {
        auto call = parse_call_prefix(it->get<std::string>());
        if (!call) throw MalformedDocument("unparsable call text " + it->dump());
        call->raw_span = {};
        if (auto ai = j.find("attempt_index"); ai != j.end()) call->attempt_index = ai->get<std::size_t>();
        t.call = canonicalize(std::move(*call));
    }
    if (auto it = j.find("attempt_trail"); it != j.end()) {
        for (const auto& a : *it) t.attempt_trail.push_back({a.at("raw").get<std::string>(), verdict_from_json(a)});
    }
    if (auto it = j.find("timestamp"); it != j.end()) t.timestamp = it->get<std::uint64_t>();
    return t;
}

void write_transcripts(std::ostream& out, const std::vector<DialogTranscript>& transcripts) {
    for (const auto& d : transcripts) {
        for (std::size_t i = 0; i < d.turns.size(); ++i) {
            ordered_json j = turn_to_json(d.dialog_id, d.turns[i]);
            if (i == 0) {
                // Dialog-level fields ride on the first turn.
                j["domains"] = d.domains;
                j["status"] = to_string(d.status);
                j["config_fingerprint"] = d.config_fingerprint;
            }
            out << j.dump() << '\n';
        }
    }
}

void write_transcripts_file(const std::filesystem::path& path,
                            const std::vector<DialogTranscript>& transcripts) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_transcripts(out, transcripts);
}

std::vector<DialogTranscript> read_transcripts(std::istream& in) {
    std::vector<DialogTranscript> out;
    std::map<std::string, std::size_t> index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            const auto id = j.at("dialog_id").get<std::string>();
            auto [it, inserted] = index.emplace(id, out.size());
            if (inserted) {
                out.emplace_back();
                out.back().dialog_id = id;
            }
            DialogTranscript& d = out[it->second];
            if (auto f = j.find("domains"); f != j.end()) d.domains = f->get<std::vector<std::string>>();
            if (auto f = j.find("config_fingerprint"); f != j.end()) d.config_fingerprint = f->get<std::string>();
            if (auto f = j.find("status"); f != j.end()) {
                const auto st = parse_status(f->get<std::string>());
                if (!st) throw MalformedDocument("line " + std::to_string(lineno) + ": unknown status " + f->dump());
                d.status = *st;
            }
            out[it->second].turns.push_back(turn_from_json(j));
        } catch (const json::exception& e) {
            throw MalformedDocument("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<DialogTranscript> read_transcripts_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedDocument("cannot open " + path.string());
    return read_transcripts(in);
}

}  // namespace todkit
