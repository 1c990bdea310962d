#include "todkit/backend.hpp"

#include <fstream>

#include "todkit/error.hpp"

namespace todkit {

const char* to_string(BackendErrorKind kind) noexcept {
    switch (kind) {
        case BackendErrorKind::Unreachable: return "Unreachable";
        case BackendErrorKind::Unauthorized: return "Unauthorized";
        case BackendErrorKind::RateLimited: return "RateLimited";
        case BackendErrorKind::Truncated: return "Truncated";
    }
    return "?";
}

void check_request(const GenerationRequest& req) {
    if (req.messages.empty()) throw ContractViolation("generation request has no messages");
    if (req.messages.front().role != "system")
        throw ContractViolation("first message of a generation request must be the system prompt");
    if (req.max_tokens <= 0) throw ContractViolation("max_tokens must be positive");
}

void ReplayScript::set(const std::string& session_id, std::size_t turn_index, std::string text) {
    entries_[{session_id, turn_index}] = {std::move(text)};
}

void ReplayScript::set_attempts(const std::string& session_id, std::size_t turn_index,
                                std::vector<std::string> responses) {
    if (responses.empty()) throw ContractViolation("scripted turn needs at least one response");
    entries_[{session_id, turn_index}] = std::move(responses);
}

const std::vector<std::string>* ReplayScript::find(const std::string& session_id,
                                                   std::size_t turn_index) const {
    auto it = entries_.find({session_id, turn_index});
    return it == entries_.end() ? nullptr : &it->second;
}

nlohmann::ordered_json ReplayScript::to_json() const {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& [key, responses] : entries_) {
        nlohmann::ordered_json e;
        e["session_id"] = key.first;
        e["turn_index"] = key.second;
        e["responses"] = responses;
        entries.push_back(std::move(e));
    }
    nlohmann::ordered_json doc;
    doc["entries"] = std::move(entries);
    return doc;
}

ReplayScript ReplayScript::from_json(const nlohmann::json& j) {
    ReplayScript script;
    try {
        for (const auto& e : j.at("entries"))
            script.set_attempts(e.at("session_id").get<std::string>(),
                                e.at("turn_index").get<std::size_t>(),
                                e.at("responses").get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
        throw MalformedDocument(std::string("replay script: ") + e.what());
    }
    return script;
}

ReplayScript ReplayScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedDocument("cannot open " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(e.what());
    }
}

ReplayBackend::ReplayBackend(ReplayScript script, std::string name)
    : script_(std::move(script)), name_(std::move(name)) {}

GenerationResult ReplayBackend::generate(const GenerationRequest& req) {
    ++calls_;
    check_request(req);
    const auto* responses = script_.find(req.session_id, req.turn_index);
    if (!responses)
        throw BackendError(BackendErrorKind::Unreachable,
                           "no scripted response for (" + req.session_id + ", " +
                               std::to_string(req.turn_index) + ")");
    GenerationResult r;
    r.text = (*responses)[std::min(req.attempt, responses->size() - 1)];
    return r;
}

std::shared_ptr<Backend> make_replay_backend(ReplayScript script, std::string name) {
    return std::make_shared<ReplayBackend>(std::move(script), std::move(name));
}

}  // namespace todkit
