#include "todkit/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#include "todkit/digest.hpp"
#include "todkit/error.hpp"
#include "todkit/prompting.hpp"
#include "todkit/text.hpp"

namespace todkit {

namespace {

using Field = std::variant<std::string RunConfig::*, bool RunConfig::*, std::int64_t RunConfig::*,
                           std::uint64_t RunConfig::*, double RunConfig::*>;

struct KeyDef {
    const char* name;
    Field field;
    bool is_path = false;
};

const std::vector<KeyDef>& key_defs() {
    static const std::vector<KeyDef> defs = {
        {"corpus", &RunConfig::corpus, true},
        {"backend", &RunConfig::backend},
        {"replay_script", &RunConfig::replay_script, true},
        {"no_feedback", &RunConfig::no_feedback},
        {"no_chain", &RunConfig::no_chain},
        {"max_feedback_retries", &RunConfig::max_feedback_retries},
        {"turn_cap", &RunConfig::turn_cap},
        {"concurrency", &RunConfig::concurrency},
        {"fuzzy_threshold", &RunConfig::fuzzy_threshold},
        {"out", &RunConfig::out, true},
        {"seed", &RunConfig::seed},
        {"seeds_dir", &RunConfig::seeds_dir, true},
        {"cache_dir", &RunConfig::cache_dir, true},
        {"exemplar_fallback", &RunConfig::exemplar_fallback},
        {"user_simulator", &RunConfig::user_simulator},
        {"search_mode", &RunConfig::search_mode},
        {"tables_dir", &RunConfig::tables_dir, true},
        {"endpoint", &RunConfig::endpoint},
        {"model_id", &RunConfig::model_id},
        {"api_key_env", &RunConfig::api_key_env},
        {"timeout_ms", &RunConfig::timeout_ms},
        {"max_concurrency", &RunConfig::max_concurrency},
        {"temperature", &RunConfig::temperature},
        {"max_tokens", &RunConfig::max_tokens},
    };
    return defs;
}

const KeyDef* find_key(const std::string& key) {
    for (const auto& d : key_defs())
        if (key == d.name) return &d;
    return nullptr;
}

std::string unquote(const std::string& key, const std::string& raw) {
    if (raw.size() >= 2 && (raw.front() == '"' || raw.front() == '\'') && raw.back() == raw.front()) {
        std::string out;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            if (raw[i] == '\\' && i + 2 < raw.size()) {
                const char n = raw[++i];
                out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
            } else {
                out.push_back(raw[i]);
            }
        }
        return out;
    }
    if (!raw.empty() && (raw.front() == '"' || raw.front() == '\''))
        throw ConfigError(key + ": unterminated string");
    return raw;
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
    T value{};
    const char* end = raw.data() + raw.size();
    auto [ptr, ec] = std::from_chars(raw.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected a number, got \"" + raw + "\"");
    return value;
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == '\\') ++i;
            else if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& d : key_defs()) k.emplace_back(d.name);
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& raw_value) {
    const KeyDef* def = find_key(key);
    if (!def) throw ConfigError("unknown config key \"" + key + "\"");
    const std::string raw = text::trim(raw_value);
    std::visit(
        [&](auto member) {
            using T = std::remove_reference_t<decltype(cfg.*member)>;
            if constexpr (std::is_same_v<T, std::string>) {
                cfg.*member = unquote(key, raw);
            } else if constexpr (std::is_same_v<T, bool>) {
                const std::string v = text::to_lower(unquote(key, raw));
                if (v == "true" || v == "1") cfg.*member = true;
                else if (v == "false" || v == "0") cfg.*member = false;
                else throw ConfigError(key + ": expected true or false, got \"" + raw + "\"");
            } else {
                cfg.*member = parse_number<T>(key, unquote(key, raw));
            }
        },
        def->field);
}

namespace {

RunConfig parse_config_tracked(const std::string& text, RunConfig base, std::vector<std::string>* set_keys) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = text::trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') throw ConfigError("line " + std::to_string(lineno) + ": tables are not supported");
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = text::trim(body.substr(0, eq));
        try {
            set_config_value(base, key, body.substr(eq + 1));
            if (set_keys) set_keys->push_back(key);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig base) {
    return parse_config_tracked(text, std::move(base), nullptr);
}

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    RunConfig cfg;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot open config " + file->string());
        std::ostringstream body;
        body << in.rdbuf();
        std::vector<std::string> set_keys;
        cfg = parse_config_tracked(body.str(), cfg, &set_keys);
        const auto base_dir = file->parent_path();
        for (const auto& key : set_keys) {
            const KeyDef* d = find_key(key);
            if (!d->is_path) continue;
            auto member = std::get<std::string RunConfig::*>(d->field);
            const std::string& v = cfg.*member;
            if (!v.empty() && std::filesystem::path(v).is_relative())
                cfg.*member = (base_dir / v).lexically_normal().string();
        }
    }
    for (const auto& d : key_defs()) {
        std::string env_name = "TODKIT_";
        for (const char* p = d.name; *p; ++p) env_name.push_back(static_cast<char>(std::toupper(*p)));
        if (auto v = env(env_name)) set_config_value(cfg, d.name, *v);
    }
    cfg.check();
    return cfg;
}

void RunConfig::check() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(backend == "oracle" || backend == "replay" || backend == "http" || backend == "none",
            "backend must be oracle, replay, http or none");
    require(backend != "replay" || !replay_script.empty(), "backend = replay needs replay_script");
    require(backend != "http" || !endpoint.empty(), "backend = http needs endpoint");
    require(max_feedback_retries >= 0 && max_feedback_retries <= 10, "max_feedback_retries must be in [0, 10]");
    require(turn_cap >= 2 && turn_cap <= 1000, "turn_cap must be in [2, 1000]");
    require(concurrency >= 1 && concurrency <= 256, "concurrency must be in [1, 256]");
    require(fuzzy_threshold > 0.0 && fuzzy_threshold <= 1.0, "fuzzy_threshold must be in (0, 1]");
    require(user_simulator == "scripted" || user_simulator == "llm", "user_simulator must be scripted or llm");
    require(search_mode == "replay" || search_mode == "tabular", "search_mode must be replay or tabular");
    require(search_mode != "tabular" || !tables_dir.empty(), "search_mode = tabular needs tables_dir");
    require(timeout_ms >= 1 && timeout_ms <= 600000, "timeout_ms must be in [1, 600000]");
    require(max_concurrency >= 1 && max_concurrency <= 1024, "max_concurrency must be in [1, 1024]");
    require(temperature >= 0.0 && temperature <= 2.0, "temperature must be in [0, 2]");
    require(max_tokens >= 1 && max_tokens <= 1000000, "max_tokens must be in [1, 1000000]");
    require(!corpus.empty(), "corpus must be set");
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    for (const auto& d : key_defs())
        std::visit([&](auto member) { j[d.name] = this->*member; }, d.field);
    return j;
}

std::string config_fingerprint(const RunConfig& cfg, const std::string& corpus_digest) {
    nlohmann::ordered_json j;
    j["config"] = cfg.to_json();
    j["template_version"] = kTemplateVersion;
    j["corpus_digest"] = corpus_digest;
    return sha256_hex(j.dump());
}

}  // namespace todkit
