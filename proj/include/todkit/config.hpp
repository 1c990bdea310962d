#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

namespace todkit {

struct RunConfig {
    std::string corpus = "fixtures/corpus";
    /// oracle | replay | http | none
    std::string backend = "oracle";
    std::string replay_script;
    bool no_feedback = false;
    bool no_chain = false;
    std::int64_t max_feedback_retries = 3;
    std::int64_t turn_cap = 40;
    std::int64_t concurrency = 4;
    double fuzzy_threshold = 0.8;
    std::string out = "out";
    std::uint64_t seed = 0;
    /// Defaults to <corpus>/seeds.
    std::string seeds_dir;
    /// Empty disables persistence of generated exemplars.
    std::string cache_dir;
    /// Use the source dialog when stage-1 generation fails.
    bool exemplar_fallback = true;
    /// scripted | llm
    std::string user_simulator = "scripted";
    /// replay | tabular
    std::string search_mode = "replay";
    std::string tables_dir;
    std::string endpoint;
    std::string model_id = "oracle";
    std::string api_key_env;
    std::int64_t timeout_ms = 60000;
    std::int64_t max_concurrency = 4;
    double temperature = 0.0;
    std::int64_t max_tokens = 1024;

    /// Throws ConfigError when a field is out of range.
    void check() const;
    nlohmann::ordered_json to_json() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Applies `key = value` lines (# comments, quoted strings, true/false,
/// numbers) on top of `base`. Unknown keys and mistyped values throw ConfigError.
RunConfig parse_config(const std::string& text, RunConfig base = {});

/// File layer, then TODKIT_<KEY> environment overrides, then check().
/// Relative paths in the file resolve against the file's directory.
RunConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

/// Sets one key from its textual form, as the file and environment layers do.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& raw_value);

/// Keys accepted in files and as TODKIT_<KEY> overrides.
const std::vector<std::string>& config_keys();

/// Digest of every field, the template version and the corpus digest.
std::string config_fingerprint(const RunConfig& cfg, const std::string& corpus_digest);

}  // namespace todkit
