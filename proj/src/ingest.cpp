#include "todkit/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "todkit/error.hpp"
#include "todkit/prompting.hpp"
#include "todkit/text.hpp"
#include "todkit/validator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace todkit {

namespace {

ordered_json read_ordered(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedDocument("cannot open " + path.string());
    try {
        return ordered_json::parse(in);
    } catch (const json::parse_error& e) {
        throw MalformedDocument(path.string() + ": " + e.what());
    }
}

Turn make_turn(Role role, std::string text) {
    Turn t;
    t.role = role;
    t.text = std::move(text);
    return t;
}

struct PendingRequest {
    std::string domain;
    std::string slot;
    std::size_t turn_index;
    std::size_t call_count_before;  // calls emitted before the request
    std::optional<std::string> value;
};

struct CallRecord {
    std::string domain;
    ApiCall call;
    std::vector<Row> rows;
};

/// Shared tail of both converters: goals, requests, replay table, checks.
CorpusItem finish_item(const std::string& dialog_id, std::vector<std::string> domains,
                       const std::vector<CallRecord>& calls, std::vector<PendingRequest> requests,
                       std::vector<Turn> turns, const SchemaRegistry& registry, IngestResult& result) {
    CorpusItem item;
    item.dialog_id = dialog_id;
    item.domains = std::move(domains);
    item.domain_class = item.domains.size() > 1 ? DomainClass::Multi : DomainClass::Single;
    std::map<std::string, std::size_t> occurrences;
    for (const auto& c : calls) {
        item.goal.goal_calls.push_back(c.call);
        const std::string key = text::name_key(c.call.method);
        item.replay_results[{key, occurrences[key]++}] = c.rows;
    }
    for (auto& r : requests) {
        // Attach to the latest call of the request's domain, else the next one.
        std::optional<std::size_t> goal_index;
        for (std::size_t i = r.call_count_before; i-- > 0;)
            if (calls[i].domain == r.domain) {
                goal_index = i;
                break;
            }
        if (!goal_index)
            for (std::size_t i = r.call_count_before; i < calls.size(); ++i)
                if (calls[i].domain == r.domain) {
                    goal_index = i;
                    break;
                }
        if (!goal_index) {
            ++result.dropped_requests;
            continue;
        }
        if (!r.value)
            for (const auto& row : calls[*goal_index].rows)
                if (row.contains(r.slot)) {
                    r.value = cell_text(row[r.slot]);
                    break;
                }
        if (!r.value) {
            ++result.dropped_requests;
            continue;
        }
        auto& slots = item.goal.request_slots[*goal_index];
        if (std::find(slots.begin(), slots.end(), r.slot) == slots.end()) slots.push_back(r.slot);
        item.gold_requests.push_back({r.slot, *r.value, r.turn_index});
    }
    DialogTranscript t;
    t.dialog_id = dialog_id;
    t.domains = item.domains;
    t.turns = std::move(turns);
    item.gold_transcript = std::move(t);
    check_item(item, registry.subset(item.domains));
    result.total_calls += calls.size();
    return item;
}

/// Drops a request whose value is absent from every row rather than failing the dialog.
void prune_unsupported_requests(std::vector<PendingRequest>& requests, const std::vector<CallRecord>& calls,
                                IngestResult& result) {
    std::erase_if(requests, [&](const PendingRequest& r) {
        if (!r.value) return false;
        const std::string want = inform_normalize(*r.value);
        for (const auto& c : calls)
            for (const auto& row : c.rows)
                for (const auto& [k, v] : row.items())
                    if (inform_normalize(cell_text(v)) == want) return false;
        ++result.dropped_requests;
        return true;
    });
}

ordered_json sgd_schema_json(const ordered_json& service) {
    ordered_json j;
    j["service_name"] = service.at("service_name");
    j["intents"] = ordered_json::array();
    for (const auto& in : service.at("intents")) {
        ordered_json intent;
        intent["name"] = in.at("name");
        intent["is_transactional"] = in.value("is_transactional", false);
        intent["required_slots"] = in.value("required_slots", ordered_json::array());
        ordered_json optional = ordered_json::array();
        if (auto it = in.find("optional_slots"); it != in.end()) {
            if (it->is_object())
                for (const auto& [k, v] : it->items()) optional.push_back(k);
            else
                optional = *it;
        }
        intent["optional_slots"] = optional;
        j["intents"].push_back(intent);
    }
    j["slots"] = ordered_json::array();
    for (const auto& s : service.at("slots")) {
        ordered_json slot;
        slot["name"] = s.at("name");
        ordered_json values = ordered_json::array();
        if (s.value("is_categorical", false)) {
            std::set<std::string> seen;
            for (const auto& v : s.value("possible_values", ordered_json::array()))
                if (seen.insert(text::to_lower(v.get<std::string>())).second) values.push_back(v);
        }
        slot["possible_values"] = values;
        if (s.contains("description")) slot["description"] = s["description"];
        j["slots"].push_back(slot);
    }
    return j;
}

ApiCall sgd_call(const ordered_json& service_call) {
    ApiCall call;
    call.method = service_call.at("method").get<std::string>();
    const ordered_json params = service_call.value("parameters", ordered_json::object());
    for (const auto& [k, v] : params.items()) {
        ParamTriple p;
        p.name = k;
        p.op = Operator::EqualTo;
        p.values = {v.is_string() ? v.get<std::string>() : v.dump()};
        call.params.push_back(std::move(p));
    }
    return canonicalize(std::move(call));
}

}  // namespace

IngestResult convert_sgd(const fs::path& dir) {
    IngestResult result;
    const fs::path schema_path = dir / "schema.json";
    for (const auto& service : read_ordered(schema_path)) {
        try {
            result.schemas.push_back(schema_from_json(sgd_schema_json(service)));
        } catch (const SchemaViolation& e) {
            throw SchemaViolation(schema_path.filename().string() + "." + e.path(), e.what());
        }
    }
    const SchemaRegistry registry(result.schemas);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.starts_with("dialogues_") && e.path().extension() == ".json")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
        const auto dialogs = read_ordered(file);
        for (std::size_t offset = 0; offset < dialogs.size(); ++offset) {
            const auto& d = dialogs[offset];
            try {
                if (!d.contains("dialogue_id") || !d.contains("turns") || !d.contains("services"))
                    throw UnsupportedRecord(file.filename().string(), offset, "missing dialogue_id/turns/services");
                std::vector<std::string> domains = d.at("services").get<std::vector<std::string>>();
                for (const auto& s : domains)
                    if (!registry.find(s))
                        throw UnsupportedRecord(file.filename().string(), offset, "service " + s + " not in schema");

                std::vector<Turn> turns;
                std::vector<CallRecord> calls;
                std::vector<PendingRequest> requests;
                for (const auto& turn : d.at("turns")) {
                    const std::string speaker = turn.value("speaker", "");
                    const std::string utterance = turn.value("utterance", "");
                    const auto frames = turn.value("frames", ordered_json::array());
                    if (speaker == "USER") {
                        turns.push_back(make_turn(Role::User, utterance));
                        for (const auto& f : frames)
                            for (const auto& a : f.value("actions", ordered_json::array()))
                                if (a.value("act", "") == "REQUEST")
                                    requests.push_back({f.at("service"), a.at("slot"), turns.size() - 1,
                                                        calls.size(), std::nullopt});
                    } else if (speaker == "SYSTEM") {
                        for (const auto& f : frames) {
                            if (!f.contains("service_call")) continue;
                            CallRecord rec;
                            rec.domain = f.at("service").get<std::string>();
                            rec.call = sgd_call(f.at("service_call"));
                            for (const auto& row : f.value("service_results", ordered_json::array()))
                                rec.rows.push_back(row);
                            const auto verdict = validate(rec.call, registry.subset({rec.domain}));
                            if (!verdict.ok)
                                throw UnsupportedRecord(file.filename().string(), offset,
                                                        "service call " + serialize(rec.call) + " fails validation (" +
                                                            to_string(verdict.errors.front().kind) + ")");
                            Turn api = make_turn(Role::ApiCall, serialize(rec.call));
                            api.call = rec.call;
                            turns.push_back(std::move(api));
                            turns.push_back(make_turn(Role::SearchResults, render_search_results(rec.rows)));
                            calls.push_back(std::move(rec));
                        }
                        turns.push_back(make_turn(Role::System, utterance));
                        for (const auto& f : frames)
                            for (const auto& a : f.value("actions", ordered_json::array())) {
                                if (a.value("act", "") != "INFORM") continue;
                                const auto values = a.value("values", ordered_json::array());
                                if (values.empty()) continue;
                                for (auto& r : requests)
                                    if (!r.value && r.domain == f.value("service", "") &&
                                        r.slot == a.value("slot", ""))
                                        r.value = values.front().get<std::string>();
                            }
                    } else {
                        throw UnsupportedRecord(file.filename().string(), offset, "unknown speaker " + speaker);
                    }
                }
                prune_unsupported_requests(requests, calls, result);
                result.items.push_back(finish_item(d.at("dialogue_id").get<std::string>(), std::move(domains),
                                                   calls, std::move(requests), std::move(turns), registry, result));
            } catch (const UnsupportedRecord& e) {
                ++result.skipped;
                result.skip_reasons.push_back(std::string(e.what()) + " [" + d.value("dialogue_id", "?") + "]");
            } catch (const Error& e) {
                ++result.skipped;
                result.skip_reasons.push_back(file.filename().string() + "@" + std::to_string(offset) + ": " + e.what());
            } catch (const json::exception& e) {
                ++result.skipped;
                result.skip_reasons.push_back(file.filename().string() + "@" + std::to_string(offset) + ": " + e.what());
            }
        }
    }
    std::sort(result.items.begin(), result.items.end(),
              [](const CorpusItem& a, const CorpusItem& b) { return a.dialog_id < b.dialog_id; });
    return result;
}

bool contains_cjk(std::string_view s) {
    for (std::size_t i = 0; i < s.size();) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : 2;
        if (i + len > s.size()) break;
        std::uint32_t cp = 0;
        if (len == 2) cp = ((c & 0x1F) << 6) | (s[i + 1] & 0x3F);
        else if (len == 3) cp = ((c & 0x0F) << 12) | ((s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F);
        else cp = ((c & 0x07) << 18) | ((s[i + 1] & 0x3F) << 12) | ((s[i + 2] & 0x3F) << 6) | (s[i + 3] & 0x3F);
        if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x3000 && cp <= 0x303F) ||
            (cp >= 0xFF00 && cp <= 0xFFEF) || (cp >= 0x20000 && cp <= 0x2A6DF))
            return true;
        i += len;
    }
    return false;
}

namespace {

std::string bitod_domain(const std::string& method) {
    const auto pos = method.find('_');
    return pos == std::string::npos ? method : method.substr(0, pos);
}

bool bitod_is_chinese(const std::string& id, const ordered_json& dialog) {
    const std::string lower = text::to_lower(id);
    if (lower.find("_zh") != std::string::npos || lower.starts_with("zh")) return true;
    for (const auto& ev : dialog.value("Events", ordered_json::array()))
        if (contains_cjk(ev.value("Text", ""))) return true;
    return false;
}

}  // namespace

IngestResult convert_bitod(const fs::path& file) {
    IngestResult result;
    const auto doc = read_ordered(file);
    const std::string fname = file.filename().string();

    struct Draft {
        std::string id;
        std::vector<std::string> domains;
        std::vector<CallRecord> calls;
        std::vector<PendingRequest> requests;
        std::vector<Turn> turns;
    };
    std::vector<Draft> drafts;
    // intent -> (observed slots, per-slot observation count, call count)
    struct IntentStats {
        std::string domain;
        std::vector<std::string> slots;
        std::map<std::string, std::size_t> seen;
        std::size_t calls = 0;
    };
    std::map<std::string, IntentStats> stats;

    std::size_t offset = 0;
    for (const auto& [id, dialog] : doc.items()) {
        const std::size_t here = offset++;
        if (bitod_is_chinese(id, dialog)) {
            ++result.filtered;
            continue;
        }
        try {
            Draft dr;
            dr.id = id;
            std::string active_intent;
            ordered_json state = ordered_json::object();
            if (!dialog.contains("Events")) throw UnsupportedRecord(fname, here, "dialog " + id + " has no Events");
            for (const auto& ev : dialog.at("Events")) {
                const std::string agent = ev.value("Agent", "");
                if (agent == "User") {
                    if (ev.contains("active_intent") && ev["active_intent"].is_string())
                        active_intent = ev["active_intent"].get<std::string>();
                    if (ev.contains("state")) state = ev["state"];
                    dr.turns.push_back(make_turn(Role::User, ev.value("Text", "")));
                    for (const auto& a : ev.value("Actions", ordered_json::array()))
                        if (text::to_lower(a.value("act", "")) == "request" && !active_intent.empty())
                            dr.requests.push_back(
                                {bitod_domain(active_intent), a.at("slot"), dr.turns.size() - 1, dr.calls.size(), std::nullopt});
                } else if (agent == "Wizard") {
                    dr.turns.push_back(make_turn(Role::System, ev.value("Text", "")));
                } else if (agent == "KnowledgeBase") {
                    if (active_intent.empty()) throw UnsupportedRecord(fname, here, "knowledge base event before any intent");
                    CallRecord rec;
                    rec.domain = bitod_domain(active_intent);
                    rec.call.method = active_intent;
                    const ordered_json constraints = state.value(active_intent, ordered_json::object());
                    for (const auto& [slot, constraint] : constraints.items()) {
                        ParamTriple p;
                        p.name = slot;
                        const std::string relation = constraint.value("relation", "equal_to");
                        const auto op = parse_operator(relation);
                        if (!op || *op == Operator::None)
                            throw UnsupportedRecord(fname, here, "unknown relation " + relation);
                        p.op = *op;
                        const auto& value = constraint.at("value");
                        if (value.is_array())
                            for (const auto& v : value) p.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
                        else
                            p.values.push_back(value.is_string() ? value.get<std::string>() : value.dump());
                        if (p.values.empty()) throw UnsupportedRecord(fname, here, "empty value for " + slot);
                        rec.call.params.push_back(std::move(p));
                    }
                    rec.call = canonicalize(std::move(rec.call));
                    if (ev.contains("Items"))
                        for (const auto& row : ev["Items"]) rec.rows.push_back(row);
                    else if (ev.contains("Item"))
                        rec.rows.push_back(ev["Item"]);

                    auto& st = stats[active_intent];
                    st.domain = rec.domain;
                    ++st.calls;
                    for (const auto& p : rec.call.params) {
                        if (!st.seen.count(p.name)) st.slots.push_back(p.name);
                        ++st.seen[p.name];
                    }
                    Turn api = make_turn(Role::ApiCall, serialize(rec.call));
                    api.call = rec.call;
                    dr.turns.push_back(std::move(api));
                    dr.turns.push_back(make_turn(Role::SearchResults, render_search_results(rec.rows)));
                    if (std::find(dr.domains.begin(), dr.domains.end(), rec.domain) == dr.domains.end())
                        dr.domains.push_back(rec.domain);
                    dr.calls.push_back(std::move(rec));
                } else {
                    throw UnsupportedRecord(fname, here, "unknown agent " + agent);
                }
            }
            drafts.push_back(std::move(dr));
        } catch (const UnsupportedRecord& e) {
            ++result.skipped;
            result.skip_reasons.push_back(e.what());
        } catch (const json::exception& e) {
            ++result.skipped;
            result.skip_reasons.push_back(fname + "@" + std::to_string(here) + ": " + e.what());
        }
    }

    // Derived schemas: slots seen in every call of an intent are required.
    std::map<std::string, DomainSchema> by_domain;
    for (const auto& [intent_name, st] : stats) {
        DomainSchema& ds = by_domain[st.domain];
        ds.domain_name = st.domain;
        IntentDef in;
        in.name = intent_name;
        in.is_transactional = intent_name.find("booking") != std::string::npos;
        for (const auto& s : st.slots) {
            (st.seen.at(s) == st.calls ? in.required_slots : in.optional_slots).push_back(s);
            if (!ds.find_slot(s)) {
                SlotDef def;
                def.name = s;
                ds.slots.push_back(def);
            }
        }
        ds.intents.push_back(std::move(in));
    }
    for (auto& [name, ds] : by_domain) result.schemas.push_back(schema_from_json(schema_to_json(ds)));
    const SchemaRegistry registry(result.schemas);

    for (auto& dr : drafts) {
        try {
            prune_unsupported_requests(dr.requests, dr.calls, result);
            result.items.push_back(finish_item(dr.id, dr.domains, dr.calls, std::move(dr.requests),
                                               std::move(dr.turns), registry, result));
        } catch (const Error& e) {
            ++result.skipped;
            result.skip_reasons.push_back(fname + ": " + e.what());
        }
    }
    std::sort(result.items.begin(), result.items.end(),
              [](const CorpusItem& a, const CorpusItem& b) { return a.dialog_id < b.dialog_id; });
    return result;
}

}  // namespace todkit
