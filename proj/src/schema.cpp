#include "todkit/schema.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "todkit/error.hpp"
#include "todkit/text.hpp"

namespace todkit {

using nlohmann::json;

bool IntentDef::is_required(std::string_view slot) const {
    const std::string key = text::name_key(slot);
    return std::any_of(required_slots.begin(), required_slots.end(),
                       [&](const std::string& s) { return text::name_key(s) == key; });
}

std::vector<std::string> IntentDef::all_slots() const {
    std::vector<std::string> out = required_slots;
    out.insert(out.end(), optional_slots.begin(), optional_slots.end());
    return out;
}

std::optional<std::string> IntentDef::accepts(std::string_view slot) const {
    const std::string key = text::name_key(slot);
    for (const auto& s : required_slots)
        if (text::name_key(s) == key) return s;
    for (const auto& s : optional_slots)
        if (text::name_key(s) == key) return s;
    return std::nullopt;
}

const IntentDef* DomainSchema::find_intent(std::string_view name) const {
    const std::string key = text::name_key(name);
    for (const auto& intent : intents)
        if (text::name_key(intent.name) == key) return &intent;
    return nullptr;
}

const SlotDef* DomainSchema::find_slot(std::string_view name) const {
    const std::string key = text::name_key(name);
    for (const auto& slot : slots)
        if (text::name_key(slot.name) == key) return &slot;
    return nullptr;
}

namespace {

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return it.key() == a; });
        if (!known) throw SchemaViolation(path + "." + it.key(), "unknown field");
    }
}

const json& require(const json& obj, const char* field, const std::string& path) {
    auto it = obj.find(field);
    if (it == obj.end()) throw SchemaViolation(path + "." + field, "missing field");
    return *it;
}

std::string require_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaViolation(path, "expected string");
    std::string s = v.get<std::string>();
    if (text::trim(s).empty()) throw SchemaViolation(path, "empty string");
    return s;
}

std::vector<std::string> require_strings(const json& v, const std::string& path) {
    if (!v.is_array()) throw SchemaViolation(path, "expected array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto item_path = path + "[" + std::to_string(i) + "]";
        if (!v[i].is_string()) throw SchemaViolation(item_path, "expected string");
        out.push_back(v[i].get<std::string>());
    }
    return out;
}

void check_invariants(DomainSchema& schema) {
    if (schema.intents.empty()) throw SchemaViolation("intents", "schema defines no intents");

    std::set<std::string> slot_keys;
    for (std::size_t i = 0; i < schema.slots.size(); ++i) {
        auto& slot = schema.slots[i];
        const auto path = "slots[" + std::to_string(i) + "]";
        if (!slot_keys.insert(text::name_key(slot.name)).second)
            throw SchemaViolation(path + ".name", "duplicate slot name \"" + slot.name + "\"");
        std::set<std::string> folded;
        for (const auto& v : slot.possible_values) {
            if (!folded.insert(text::to_lower(v)).second)
                throw SchemaViolation(path + ".possible_values",
                                      "duplicate possible value \"" + v + "\"");
        }
    }

    std::set<std::string> intent_keys;
    for (std::size_t i = 0; i < schema.intents.size(); ++i) {
        const auto& intent = schema.intents[i];
        const auto path = "intents[" + std::to_string(i) + "]";
        if (!intent_keys.insert(text::name_key(intent.name)).second)
            throw SchemaViolation(path + ".name", "duplicate intent name \"" + intent.name + "\"");

        std::set<std::string> required_keys;
        for (const auto& s : intent.required_slots) {
            if (!schema.find_slot(s))
                throw SchemaViolation(path + ".required_slots",
                                      "unknown slot \"" + s + "\"");
            required_keys.insert(text::name_key(s));
        }
        for (const auto& s : intent.optional_slots) {
            if (!schema.find_slot(s))
                throw SchemaViolation(path + ".optional_slots",
                                      "unknown slot \"" + s + "\"");
            if (required_keys.count(text::name_key(s)))
                throw SchemaViolation(path + ".optional_slots",
                                      "slot \"" + s + "\" is both required and optional");
        }
    }

    for (auto& slot : schema.slots) {
        slot.is_required_for.clear();
        for (const auto& intent : schema.intents)
            if (intent.is_required(slot.name)) slot.is_required_for.insert(intent.name);
    }
}

}  // namespace

DomainSchema schema_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaViolation("$", "schema document must be an object");
    reject_unknown_fields(doc, {"service_name", "intents", "slots"}, "$");

    DomainSchema schema;
    schema.domain_name = require_string(require(doc, "service_name", "$"), "service_name");

    const json& intents = require(doc, "intents", "$");
    if (!intents.is_array()) throw SchemaViolation("intents", "expected array");
    for (std::size_t i = 0; i < intents.size(); ++i) {
        const auto path = "intents[" + std::to_string(i) + "]";
        const json& j = intents[i];
        if (!j.is_object()) throw SchemaViolation(path, "expected object");
        reject_unknown_fields(j, {"name", "is_transactional", "required_slots", "optional_slots"},
                              path);
        IntentDef intent;
        intent.name = require_string(require(j, "name", path), path + ".name");
        const json& tx = require(j, "is_transactional", path);
        if (!tx.is_boolean()) throw SchemaViolation(path + ".is_transactional", "expected boolean");
        intent.is_transactional = tx.get<bool>();
        intent.required_slots =
            require_strings(require(j, "required_slots", path), path + ".required_slots");
        intent.optional_slots =
            require_strings(require(j, "optional_slots", path), path + ".optional_slots");
        schema.intents.push_back(std::move(intent));
    }

    const json& slots = require(doc, "slots", "$");
    if (!slots.is_array()) throw SchemaViolation("slots", "expected array");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto path = "slots[" + std::to_string(i) + "]";
        const json& j = slots[i];
        if (!j.is_object()) throw SchemaViolation(path, "expected object");
        reject_unknown_fields(j, {"name", "possible_values", "description", "aliases"}, path);
        SlotDef slot;
        slot.name = require_string(require(j, "name", path), path + ".name");
        slot.possible_values =
            require_strings(require(j, "possible_values", path), path + ".possible_values");
        if (auto it = j.find("description"); it != j.end()) {
            if (!it->is_string()) throw SchemaViolation(path + ".description", "expected string");
            slot.description = it->get<std::string>();
        }
        if (auto it = j.find("aliases"); it != j.end())
            slot.aliases = require_strings(*it, path + ".aliases");
        schema.slots.push_back(std::move(slot));
    }

    check_invariants(schema);
    return schema;
}

DomainSchema load_schema(std::istream& source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw MalformedDocument(e.what());
    }
    return schema_from_json(doc);
}

DomainSchema load_schema_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedDocument("cannot open " + path.string());
    try {
        return load_schema(in);
    } catch (const SchemaViolation& e) {
        throw SchemaViolation(path.filename().string() + ":" + e.path(),
                              std::string(e.what()).substr(e.path().size() + 2));
    }
}

nlohmann::ordered_json schema_to_json(const DomainSchema& schema) {
    nlohmann::ordered_json doc;
    doc["service_name"] = schema.domain_name;
    doc["intents"] = nlohmann::ordered_json::array();
    for (const auto& intent : schema.intents) {
        nlohmann::ordered_json j;
        j["name"] = intent.name;
        j["is_transactional"] = intent.is_transactional;
        j["required_slots"] = intent.required_slots;
        j["optional_slots"] = intent.optional_slots;
        doc["intents"].push_back(std::move(j));
    }
    doc["slots"] = nlohmann::ordered_json::array();
    for (const auto& slot : schema.slots) {
        nlohmann::ordered_json j;
        j["name"] = slot.name;
        j["possible_values"] = slot.possible_values;
        if (slot.description) j["description"] = *slot.description;
        if (!slot.aliases.empty()) j["aliases"] = slot.aliases;
        doc["slots"].push_back(std::move(j));
    }
    return doc;
}

SchemaRegistry::SchemaRegistry(std::vector<DomainSchema> schemas) {
    std::set<std::string> seen;
    for (auto& schema : schemas) {
        if (!seen.insert(text::name_key(schema.domain_name)).second)
            throw SchemaViolation("service_name",
                                  "domain \"" + schema.domain_name + "\" registered twice");
        domains_.push_back(std::make_shared<const DomainSchema>(std::move(schema)));
    }
}

std::shared_ptr<const DomainSchema> SchemaRegistry::find(std::string_view domain_name) const {
    const std::string key = text::name_key(domain_name);
    for (const auto& d : domains_)
        if (text::name_key(d->domain_name) == key) return d;
    return nullptr;
}

const DomainSchema& SchemaRegistry::at(std::string_view domain_name) const {
    auto d = find(domain_name);
    if (!d) throw Error("domain not registered: " + std::string(domain_name));
    return *d;
}

SchemaRegistry SchemaRegistry::subset(const std::vector<std::string>& domain_names) const {
    std::vector<DomainSchema> picked;
    for (const auto& name : domain_names) picked.push_back(at(name));
    return SchemaRegistry(std::move(picked));
}

std::vector<std::string> SchemaRegistry::intent_names() const {
    std::vector<std::string> out;
    for (const auto& d : domains_)
        for (const auto& i : d->intents) out.push_back(i.name);
    return out;
}

std::optional<ResolvedIntent> resolve_intent(const SchemaRegistry& registry,
                                             std::string_view method) {
    const std::string key = text::name_key(method);
    std::optional<ResolvedIntent> found;
    for (const auto& domain : registry.domains()) {
        for (const auto& intent : domain->intents) {
            if (text::name_key(intent.name) != key) continue;
            if (found)
                throw AmbiguousIntent("intent \"" + std::string(method) + "\" is defined by both " +
                                      found->domain->domain_name + " and " + domain->domain_name);
            found = ResolvedIntent{domain, &intent};
        }
    }
    return found;
}

SchemaRegistry load_registry_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<DomainSchema> schemas;
    for (const auto& f : files) schemas.push_back(load_schema_file(f));
    return SchemaRegistry(std::move(schemas));
}

}  // namespace todkit
