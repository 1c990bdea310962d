#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "todkit/apicall.hpp"
#include "todkit/schema.hpp"

namespace todkit {

/// One result row; key order is preserved for rendering.
using Row = nlohmann::ordered_json;

/// Rows keyed by (intent name key, occurrence index within the session).
using ReplayTable = std::map<std::pair<std::string, std::size_t>, std::vector<Row>>;

/// Serves search results for executed calls. One instance per session: in
/// replay mode it counts occurrences of each intent.
class SearchProvider {
public:
    enum class Mode { Replay, Tabular };

    static SearchProvider replay(ReplayTable table);
    /// Rows per domain name.
    static SearchProvider tabular(std::map<std::string, std::vector<Row>> tables);

    Mode mode() const { return mode_; }

    /// Replay: rows for (resolved intent, occurrence so far); unknown or
    /// unscripted methods give []. Tabular: rows of the call's domain whose
    /// columns satisfy every triple; triples naming no column are ignored.
    std::vector<Row> lookup(const ApiCall& call, const SchemaRegistry& registry);

private:
    Mode mode_ = Mode::Replay;
    ReplayTable replay_;
    std::map<std::string, std::size_t> occurrences_;
    std::map<std::string, std::vector<Row>> tables_;
};

/// True when `row[name]` satisfies the triple's relation.
bool row_satisfies(const Row& row, const ParamTriple& triple);

/// Python-literal style, as shown in transcripts:
/// Search Results: [{'city': 'Vancouver', 'temperature': 68}]
std::string render_search_results(const std::vector<Row>& rows);

/// Text of a row cell ("39.0", "True", "Vancouver").
std::string cell_text(const nlohmann::ordered_json& v);

/// Loads tables/<domain>.json files (each an array of row objects).
std::map<std::string, std::vector<Row>> load_tables(const std::filesystem::path& dir);

}  // namespace todkit
