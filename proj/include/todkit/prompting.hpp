#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "todkit/backend.hpp"
#include "todkit/schema.hpp"
#include "todkit/transcript.hpp"

namespace todkit {

/// Part of every exemplar cache key and of run manifests; bump on any template edit.
inline constexpr const char* kTemplateVersion = "v1";

struct PromptP1 {
    DomainSchema source_schema;
    DialogTranscript source_dialog;
    std::vector<DomainSchema> target_schemas;
    std::string rendered;
};

struct PromptP2 {
    std::vector<DomainSchema> target_schemas;
    DialogTranscript example_dialog;
    std::vector<Turn> history;
    std::string rendered;
};

/// Intents and slots laid out as in the instruction templates, closed by `end_line`.
std::string render_schema_block(const DomainSchema& schema, const std::string& end_line);

/// Stage-1 (example dialog synthesis) prompt. Throws EmptyDialog when the
/// source dialog has no turns.
PromptP1 render_p1(const DomainSchema& source_schema, const DialogTranscript& source_dialog,
                   const std::vector<DomainSchema>& target_schemas);

/// Stage-2 (live response) prompt; one schema block per target schema in the given order.
PromptP2 render_p2(const std::vector<DomainSchema>& target_schemas, const DialogTranscript& example_dialog,
                   const std::vector<Turn>& history);

/// Splits a stage-1 completion into turns by line prefix ("User:",
/// "System:"/"RealTOD:"/"Assistant:", "APICall(", "Search Results:");
/// unprefixed lines continue the previous turn. System lines carrying a
/// well-formed call become api_call turns.
DialogTranscript parse_stage1_completion(const std::string& completion);

/// >= 4 turns, alternating user/system steps, and at least one call that
/// validates against one of `targets`.
bool exemplar_quality_check(const DialogTranscript& t, const SchemaRegistry& targets);

/// Stage-1 output in the completion format; parse_stage1_completion inverts it.
std::string render_stage1_dialog(const DialogTranscript& t);

struct SeedExemplar {
    std::string dataset;
    DomainSchema schema;
    DialogTranscript dialog;
};

/// Loads every seeds/<dataset>/{schema.json,dialog.jsonl}, sorted by directory name.
std::vector<SeedExemplar> load_seeds(const std::filesystem::path& dir);

/// The seed whose intent count is closest to the targets' total, ties by domain name.
const SeedExemplar& choose_seed(const std::vector<SeedExemplar>& seeds,
                                const std::vector<DomainSchema>& targets);

/// sorted target domain names + model id + template version.
std::string exemplar_cache_key(const std::vector<std::string>& domains, const std::string& model_id);

/// Routing tag used for stage-1 requests: "exemplar:" + sorted domains joined by '+'.
std::string exemplar_session_id(const std::vector<std::string>& domains);

/// Single-flight store of generated exemplars. Concurrent misses on one key
/// run the generator exactly once. With a directory, entries persist as
/// <key>.jsonl and are reused when they still pass the quality check.
class ExemplarCache {
public:
    ExemplarCache() = default;
    explicit ExemplarCache(std::filesystem::path dir);

    DialogTranscript get_or_generate(const std::string& key, const SchemaRegistry& targets,
                                     const std::function<DialogTranscript()>& generate);
    bool contains(const std::string& key) const;

private:
    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_future<DialogTranscript>> entries_;
};

struct ExemplarRequest {
    const SeedExemplar* seed = nullptr;
    std::vector<DomainSchema> targets;
    std::string model_id;
    int max_tokens = 2048;
};

inline constexpr int kStage1Attempts = 3;

/// Sends P1, parses, quality-checks; up to kStage1Attempts tries. Throws
/// ExemplarGenerationFailed (with the last completion) on exhaustion;
/// BackendError propagates.
DialogTranscript generate_exemplar(Backend& backend, const ExemplarRequest& request,
                                   ExemplarCache* cache = nullptr);

}  // namespace todkit
