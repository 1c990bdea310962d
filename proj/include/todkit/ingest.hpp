#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "todkit/corpus.hpp"
#include "todkit/schema.hpp"

namespace todkit {

struct IngestResult {
    std::vector<DomainSchema> schemas;
    std::vector<CorpusItem> items;
    std::size_t total_calls = 0;
    /// Dialog records that could not be mapped (UnsupportedRecord), with reasons.
    std::size_t skipped = 0;
    std::vector<std::string> skip_reasons;
    /// Non-English dialogs dropped by the language filter.
    std::size_t filtered = 0;
    /// Request annotations without a recoverable value.
    std::size_t dropped_requests = 0;
};

/// SGD layout: schema.json plus dialogues_*.json. Each service_call becomes a
/// gold call (equal_to triples), its service_results the replay rows; user
/// REQUEST acts become gold requests valued by the next system INFORM of that slot.
IngestResult convert_sgd(const std::filesystem::path& dir);

/// BiTOD layout: one JSON object of dialogs, each {"Events": [...]}. Every
/// KnowledgeBase event closes a call built from the latest user
/// state[active_intent] ({slot: {relation, value}}); its Item/Items are the
/// rows. Dialogs with CJK text or a "zh" id are filtered out. Schemas are
/// derived from the observed calls.
IngestResult convert_bitod(const std::filesystem::path& file);

/// True when `s` contains a code point in the CJK ranges.
bool contains_cjk(std::string_view s);

}  // namespace todkit
