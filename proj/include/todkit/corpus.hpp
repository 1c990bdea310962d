#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "todkit/backend.hpp"
#include "todkit/metrics.hpp"
#include "todkit/schema.hpp"
#include "todkit/search.hpp"
#include "todkit/simulator.hpp"
#include "todkit/transcript.hpp"

namespace todkit {

struct CorpusItem {
    std::string dialog_id;
    std::vector<std::string> domains;
    UserGoal goal;
    std::vector<GoldRequest> gold_requests;
    ReplayTable replay_results;
    DomainClass domain_class = DomainClass::Single;
    /// Reference dialog; drives the oracle backend profile.
    std::optional<DialogTranscript> gold_transcript;

    const std::vector<ApiCall>& gold_calls() const { return goal.goal_calls; }
    DialogGold gold() const;
};

/// Throws SchemaViolation unless every gold call validates against the item's
/// domains and every gold request value occurs in some replay row.
void check_item(const CorpusItem& item, const SchemaRegistry& registry);

struct Corpus {
    std::filesystem::path root;
    SchemaRegistry registry;
    std::vector<CorpusItem> items;
    std::string digest;

    const CorpusItem* find(const std::string& dialog_id) const;
    /// Registry restricted to the item's domains, in the item's order.
    SchemaRegistry registry_for(const CorpusItem& item) const;
};

/// Reads schemas/, goals/, gold/ and results/ under `root`. Items are sorted
/// by dialog id and checked with check_item.
Corpus load_corpus(const std::filesystem::path& root);

/// Writes the canonical layout; the inverse of load_corpus.
void write_corpus(const std::filesystem::path& root, const std::vector<DomainSchema>& schemas,
                  const std::vector<CorpusItem>& items);

/// SHA-256 over the sorted relative paths and contents of every regular file under `root`.
std::string directory_digest(const std::filesystem::path& root);

nlohmann::ordered_json results_to_json(const CorpusItem& item);
void results_from_json(const nlohmann::ordered_json& j, CorpusItem& item);

/// Replays each gold transcript: (dialog_id, k) answers the k-th system-side
/// generation (api_call and system turns, in order) and
/// (exemplar_session_id(domains), 0) answers the first gold dialog over that
/// domain set, rendered in stage-1 completion form.
ReplayScript oracle_script(const Corpus& corpus);

}  // namespace todkit
