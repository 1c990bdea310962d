#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include <json.hpp>

namespace todkit {

struct Message {
    std::string role;  // system | user | assistant
    std::string text;
};

struct GenerationRequest {
    std::vector<Message> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string model_id;

    // Routing tags. Scripted backends key their responses on these; the HTTP
    // backend ignores them.
    std::string session_id;
    std::size_t turn_index = 0;
    std::size_t attempt = 0;
};

/// Throws ContractViolation unless messages is non-empty, starts with a
/// system message and max_tokens is positive.
void check_request(const GenerationRequest& req);

struct GenerationResult {
    std::string text;
    std::uint64_t latency_ms = 0;
    unsigned attempt = 1;
    bool truncated = false;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual GenerationResult generate(const GenerationRequest& req) = 0;
    /// Recorded in run manifests.
    virtual std::string identity() const = 0;
    /// generate() invocations so far.
    virtual std::size_t calls() const = 0;
};

/// Scripted responses keyed by (session_id, turn_index). Each key holds one
/// response per attempt; attempts past the end reuse the last entry, so a
/// single entry replays verbatim and [wrong, corrected] self-corrects on the
/// first retry.
class ReplayScript {
public:
    void set(const std::string& session_id, std::size_t turn_index, std::string text);
    void set_attempts(const std::string& session_id, std::size_t turn_index,
                      std::vector<std::string> responses);
    const std::vector<std::string>* find(const std::string& session_id, std::size_t turn_index) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    nlohmann::ordered_json to_json() const;
    static ReplayScript from_json(const nlohmann::json& j);
    static ReplayScript load(const std::filesystem::path& path);

private:
    std::map<std::pair<std::string, std::size_t>, std::vector<std::string>> entries_;
};

class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(ReplayScript script, std::string name = "replay");
    GenerationResult generate(const GenerationRequest& req) override;
    std::string identity() const override { return name_; }
    std::size_t calls() const override { return calls_.load(); }

private:
    ReplayScript script_;
    std::string name_;
    std::atomic<std::size_t> calls_{0};
};

std::shared_ptr<Backend> make_replay_backend(ReplayScript script, std::string name = "replay");

struct HttpBackendConfig {
    std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
    std::string model_id;
    std::string api_key_env;  // environment variable holding the key; empty = no auth
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    /// Extra headers, "Name: value" each.
    std::vector<std::string> extra_headers;
    int timeout_ms = 60000;
    int max_concurrency = 4;
    int max_attempts = 4;
    int backoff_base_ms = 500;
};

/// Delay before attempt k (k >= 2): base * 2^(k-2). Non-decreasing.
std::vector<std::chrono::milliseconds> backoff_schedule(const HttpBackendConfig& cfg);

/// Chat-completions style client: POSTs {"model","messages","temperature",
/// "max_tokens"} and reads choices[0].message.content (or content[0].text).
/// Retries timeouts, 429 and 5xx; never retries other 4xx.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig cfg);
    GenerationResult generate(const GenerationRequest& req) override;
    std::string identity() const override;
    std::size_t calls() const override { return calls_.load(); }

    static nlohmann::json request_body(const GenerationRequest& req, const std::string& model_id);
    /// Extracts (text, truncated) from a response body; throws BackendError(Truncated)
    /// on an empty, untruncated completion.
    static std::pair<std::string, bool> parse_response(const std::string& body);

private:
    HttpBackendConfig cfg_;
    std::string scheme_host_port_;
    std::string path_;
    std::counting_semaphore<1024> in_flight_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace todkit
