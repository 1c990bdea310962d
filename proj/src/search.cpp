#include "todkit/search.hpp"

#include <charconv>
#include <fstream>

#include "todkit/error.hpp"
#include "todkit/text.hpp"

namespace todkit {

SearchProvider SearchProvider::replay(ReplayTable table) {
    SearchProvider p;
    p.mode_ = Mode::Replay;
    for (auto& [key, rows] : table) p.replay_[{text::name_key(key.first), key.second}] = std::move(rows);
    return p;
}

SearchProvider SearchProvider::tabular(std::map<std::string, std::vector<Row>> tables) {
    SearchProvider p;
    p.mode_ = Mode::Tabular;
    for (auto& [domain, rows] : tables) p.tables_[text::name_key(domain)] = std::move(rows);
    return p;
}

std::string cell_text(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "True" : "False";
    if (v.is_null()) return "None";
    return v.dump();
}

namespace {

std::optional<double> as_number(std::string_view s) {
    const std::string t = text::trim(s);
    double out = 0;
    const auto* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, out);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return out;
}

bool same_value(const std::string& a, const std::string& b) {
    if (auto x = as_number(a), y = as_number(b); x && y) return *x == *y;
    return text::to_lower(text::trim(a)) == text::to_lower(text::trim(b));
}

const nlohmann::ordered_json* find_column(const Row& row, std::string_view name) {
    const std::string key = text::name_key(name);
    for (auto it = row.begin(); it != row.end(); ++it)
        if (text::name_key(it.key()) == key) return &it.value();
    return nullptr;
}

std::string python_literal(const nlohmann::ordered_json& v) {
    if (v.is_string()) {
        std::string out = "'";
        for (char c : v.get<std::string>()) {
            if (c == '\'' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        return out + "'";
    }
    if (v.is_object()) {
        std::string out = "{";
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) out += ", ";
            first = false;
            out += python_literal(it.key()) + ": " + python_literal(it.value());
        }
        return out + "}";
    }
    if (v.is_array()) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + python_literal(v[i]);
        return out + "]";
    }
    return cell_text(v);
}

}  // namespace

bool row_satisfies(const Row& row, const ParamTriple& triple) {
    const auto* cell = find_column(row, triple.name);
    if (!cell) return false;
    const std::string value = cell_text(*cell);
    switch (triple.op) {
        case Operator::EqualTo:
        case Operator::None:
            return !triple.values.empty() && same_value(value, triple.values.front());
        case Operator::AtLeast:
        case Operator::AtMost: {
            const auto have = as_number(value);
            const auto want = triple.values.empty() ? std::nullopt : as_number(triple.values.front());
            if (!have || !want) return false;
            return triple.op == Operator::AtLeast ? *have >= *want : *have <= *want;
        }
        case Operator::OneOf:
            for (const auto& v : triple.values)
                if (same_value(value, v)) return true;
            return false;
        case Operator::Not:
            for (const auto& v : triple.values)
                if (same_value(value, v)) return false;
            return true;
    }
    return false;
}

std::vector<Row> SearchProvider::lookup(const ApiCall& call, const SchemaRegistry& registry) {
    std::optional<ResolvedIntent> resolved;
    try {
        resolved = resolve_intent(registry, call.method);
    } catch (const AmbiguousIntent&) {
        return {};
    }
    if (!resolved) return {};
    const std::string intent_key = text::name_key(resolved->intent->name);

    if (mode_ == Mode::Replay) {
        const std::size_t occurrence = occurrences_[intent_key]++;
        auto it = replay_.find({intent_key, occurrence});
        return it == replay_.end() ? std::vector<Row>{} : it->second;
    }

    auto table = tables_.find(text::name_key(resolved->domain->domain_name));
    if (table == tables_.end()) return {};
    std::vector<Row> out;
    for (const auto& row : table->second) {
        bool keep = true;
        for (const auto& triple : call.params) {
            if (!find_column(row, triple.name)) continue;
            if (!row_satisfies(row, triple)) {
                keep = false;
                break;
            }
        }
        if (keep) out.push_back(row);
    }
    return out;
}

std::string render_search_results(const std::vector<Row>& rows) {
    std::string out = "Search Results: [";
    for (std::size_t i = 0; i < rows.size(); ++i) out += (i ? ", " : "") + python_literal(rows[i]);
    return out + "]";
}

std::map<std::string, std::vector<Row>> load_tables(const std::filesystem::path& dir) {
    std::map<std::string, std::vector<Row>> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        try {
            auto rows = nlohmann::ordered_json::parse(in);
            out[entry.path().stem().string()] = rows.get<std::vector<Row>>();
        } catch (const nlohmann::json::exception& e) {
            throw MalformedDocument(entry.path().string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace todkit
