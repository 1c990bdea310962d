#include "todkit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "todkit/digest.hpp"
#include "todkit/error.hpp"
#include "todkit/prompting.hpp"
#include "todkit/text.hpp"
#include "todkit/validator.hpp"

namespace fs = std::filesystem;

namespace todkit {

DialogGold CorpusItem::gold() const {
    DialogGold g;
    g.calls = goal.goal_calls;
    g.requests = gold_requests;
    g.domain_class = domain_class;
    return g;
}

void check_item(const CorpusItem& item, const SchemaRegistry& registry) {
    const std::string where = "item " + item.dialog_id;
    for (std::size_t i = 0; i < item.gold_calls().size(); ++i) {
        const auto verdict = validate(item.gold_calls()[i], registry);
        if (!verdict.ok)
            throw SchemaViolation(where + ".gold_calls[" + std::to_string(i) + "]",
                                  std::string(to_string(verdict.errors.front().kind)) + " in " +
                                      serialize(item.gold_calls()[i]));
    }
    for (const auto& req : item.gold_requests) {
        const std::string want = inform_normalize(req.value);
        bool found = false;
        for (const auto& [key, rows] : item.replay_results)
            for (const auto& row : rows)
                for (const auto& [col, cell] : row.items())
                    if (inform_normalize(cell_text(cell)) == want) found = true;
        if (!found)
            throw SchemaViolation(where + ".gold_requests." + req.slot,
                                  "value \"" + req.value + "\" appears in no replay row");
    }
}

const CorpusItem* Corpus::find(const std::string& dialog_id) const {
    for (const auto& it : items)
        if (it.dialog_id == dialog_id) return &it;
    return nullptr;
}

SchemaRegistry Corpus::registry_for(const CorpusItem& item) const { return registry.subset(item.domains); }

nlohmann::ordered_json results_to_json(const CorpusItem& item) {
    nlohmann::ordered_json j;
    j["dialog_id"] = item.dialog_id;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& [key, rows] : item.replay_results)
        results.push_back({{"intent", key.first}, {"occurrence", key.second}, {"rows", rows}});
    j["results"] = results;
    nlohmann::ordered_json reqs = nlohmann::ordered_json::array();
    for (const auto& r : item.gold_requests)
        reqs.push_back({{"slot", r.slot}, {"value", r.value}, {"turn_index", r.turn_index}});
    j["gold_requests"] = reqs;
    return j;
}

void results_from_json(const nlohmann::ordered_json& j, CorpusItem& item) {
    for (const auto& r : j.at("results")) {
        std::vector<Row> rows;
        for (const auto& row : r.at("rows")) rows.push_back(row);
        item.replay_results[{text::name_key(r.at("intent").get<std::string>()), r.at("occurrence").get<std::size_t>()}] =
            std::move(rows);
    }
    for (const auto& r : j.at("gold_requests"))
        item.gold_requests.push_back({r.at("slot"), r.at("value"), r.at("turn_index")});
}

namespace {

nlohmann::ordered_json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedDocument("cannot open " + path.string());
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MalformedDocument("cannot write " + path.string());
    out << content;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

Corpus load_corpus(const fs::path& root) {
    Corpus c;
    c.root = root;
    if (!fs::is_directory(root / "schemas")) throw MalformedDocument(root.string() + ": no schemas/ directory");
    c.registry = load_registry_dir(root / "schemas");

    for (const auto& path : sorted_files(root / "goals", ".json")) {
        const auto j = read_json(path);
        CorpusItem item;
        try {
            item.dialog_id = j.at("dialog_id").get<std::string>();
            item.domains = j.at("domains").get<std::vector<std::string>>();
            item.goal = goal_from_json(j);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedDocument(path.string() + ": " + e.what());
        }
        item.domain_class = item.domains.size() > 1 ? DomainClass::Multi : DomainClass::Single;

        const fs::path results = root / "results" / (item.dialog_id + ".json");
        if (fs::exists(results)) {
            try {
                results_from_json(read_json(results), item);
            } catch (const nlohmann::json::exception& e) {
                throw MalformedDocument(results.string() + ": " + e.what());
            }
        }
        const fs::path gold = root / "gold" / (item.dialog_id + ".jsonl");
        if (fs::exists(gold)) {
            auto ts = read_transcripts_file(gold);
            if (ts.size() != 1) throw MalformedDocument(gold.string() + ": expected exactly one dialog");
            item.gold_transcript = std::move(ts.front());
        }
        for (const auto& d : item.domains)
            if (!c.registry.find(d))
                throw SchemaViolation("item " + item.dialog_id + ".domains", "unknown domain \"" + d + "\"");
        check_item(item, c.registry_for(item));
        c.items.push_back(std::move(item));
    }
    std::sort(c.items.begin(), c.items.end(),
              [](const CorpusItem& a, const CorpusItem& b) { return a.dialog_id < b.dialog_id; });
    c.digest = directory_digest(root);
    return c;
}

void write_corpus(const fs::path& root, const std::vector<DomainSchema>& schemas,
                  const std::vector<CorpusItem>& items) {
    for (const auto& s : schemas) write_text(root / "schemas" / (s.domain_name + ".json"), schema_to_json(s).dump(2) + "\n");
    for (const auto& item : items) {
        nlohmann::ordered_json goal;
        goal["dialog_id"] = item.dialog_id;
        goal["domains"] = item.domains;
        const auto goal_doc = goal_to_json(item.goal);
        for (const auto& [k, v] : goal_doc.items()) goal[k] = v;
        write_text(root / "goals" / (item.dialog_id + ".json"), goal.dump(2) + "\n");
        write_text(root / "results" / (item.dialog_id + ".json"), results_to_json(item).dump(2) + "\n");
        if (item.gold_transcript) {
            std::ostringstream out;
            write_transcripts(out, {*item.gold_transcript});
            write_text(root / "gold" / (item.dialog_id + ".jsonl"), out.str());
        }
    }
}

std::string directory_digest(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
    std::string buffer;
    for (const auto& rel : files) {
        std::ifstream in(root / rel, std::ios::binary);
        std::ostringstream content;
        content << in.rdbuf();
        const std::string body = content.str();
        buffer += rel.generic_string();
        buffer.push_back('\0');
        buffer += std::to_string(body.size());
        buffer.push_back('\0');
        buffer += body;
    }
    return sha256_hex(buffer);
}

ReplayScript oracle_script(const Corpus& corpus) {
    ReplayScript script;
    std::set<std::string> exemplar_keys;
    for (const auto& item : corpus.items) {
        if (!item.gold_transcript) continue;
        std::size_t k = 0;
        for (const auto& t : item.gold_transcript->turns)
            if (t.role == Role::ApiCall || t.role == Role::System) script.set(item.dialog_id, k++, t.text);
        const std::string key = exemplar_session_id(item.domains);
        if (exemplar_keys.insert(key).second) script.set(key, 0, render_stage1_dialog(*item.gold_transcript));
    }
    return script;
}

}  // namespace todkit
