#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "todkit/backend.hpp"
#include "todkit/error.hpp"

namespace todkit {

std::vector<std::chrono::milliseconds> backoff_schedule(const HttpBackendConfig& cfg) {
    std::vector<std::chrono::milliseconds> out;
    long long delay = cfg.backoff_base_ms;
    for (int k = 2; k <= cfg.max_attempts; ++k) {
        out.emplace_back(delay);
        delay *= 2;
    }
    return out;
}

HttpBackend::HttpBackend(HttpBackendConfig cfg)
    : cfg_(std::move(cfg)), in_flight_(std::max(1, cfg_.max_concurrency)) {
    if (cfg_.max_attempts < 1 || cfg_.max_attempts > 4)
        throw ConfigError("max_attempts must be within [1, 4]");
    if (cfg_.max_concurrency < 1 || cfg_.max_concurrency > 1024)
        throw ConfigError("max_concurrency must be within [1, 1024]");
    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must include a scheme: " + cfg_.endpoint);
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    scheme_host_port_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
}

std::string HttpBackend::identity() const { return "http:" + cfg_.model_id + "@" + scheme_host_port_; }

nlohmann::json HttpBackend::request_body(const GenerationRequest& req, const std::string& model_id) {
    nlohmann::json body;
    body["model"] = req.model_id.empty() ? model_id : req.model_id;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : req.messages) body["messages"].push_back({{"role", m.role}, {"content", m.text}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    return body;
}

std::pair<std::string, bool> HttpBackend::parse_response(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw BackendError(BackendErrorKind::Unreachable, std::string("unparsable response: ") + e.what());
    }
    std::string text;
    bool truncated = false;
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& choice = j["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string())
            text = choice["message"]["content"].get<std::string>();
        else if (choice.contains("text") && choice["text"].is_string())
            text = choice["text"].get<std::string>();
        truncated = choice.value("finish_reason", "") == "length";
    } else if (j.contains("content") && j["content"].is_array() && !j["content"].empty()) {
        text = j["content"][0].value("text", "");
        truncated = j.value("stop_reason", "") == "max_tokens";
    } else {
        throw BackendError(BackendErrorKind::Unreachable, "response carries no completion");
    }
    if (text.empty() && !truncated)
        throw BackendError(BackendErrorKind::Truncated, "empty completion");
    return {text, truncated};
}

GenerationResult HttpBackend::generate(const GenerationRequest& req) {
    ++calls_;
    check_request(req);
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    httplib::Client client(scheme_host_port_);
    const auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                  static_cast<time_t>((cfg_.timeout_ms % 1000) * 1000));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                            static_cast<time_t>((cfg_.timeout_ms % 1000) * 1000));

    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
            headers.emplace(cfg_.auth_header, cfg_.auth_prefix + key);
    }
    for (const auto& h : cfg_.extra_headers) {
        const auto colon = h.find(':');
        if (colon == std::string::npos) continue;
        auto value = h.substr(colon + 1);
        value.erase(0, value.find_first_not_of(' '));
        headers.emplace(h.substr(0, colon), value);
    }

    const std::string body = request_body(req, cfg_.model_id).dump();
    const auto delays = backoff_schedule(cfg_);
    BackendErrorKind last_kind = BackendErrorKind::Unreachable;
    std::string last_message;
    const auto started = std::chrono::steady_clock::now();

    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        if (attempt > 1) std::this_thread::sleep_for(delays[attempt - 2]);
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_kind = BackendErrorKind::Unreachable;
            last_message = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        const int status = res->status;
        if (status == 429) {
            last_kind = BackendErrorKind::RateLimited;
            last_message = "HTTP 429";
            continue;
        }
        if (status >= 500) {
            last_kind = BackendErrorKind::Unreachable;
            last_message = "HTTP " + std::to_string(status);
            continue;
        }
        if (status == 401 || status == 403)
            throw BackendError(BackendErrorKind::Unauthorized, "HTTP " + std::to_string(status));
        if (status >= 400)
            throw BackendError(BackendErrorKind::Unreachable,
                               "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));

        auto [text, truncated] = parse_response(res->body);
        GenerationResult out;
        out.text = std::move(text);
        out.truncated = truncated;
        out.attempt = static_cast<unsigned>(attempt);
        out.latency_ms = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
                .count());
        return out;
    }
    throw BackendError(last_kind, last_message + " after " + std::to_string(cfg_.max_attempts) + " attempts");
}

}  // namespace todkit
