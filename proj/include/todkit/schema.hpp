#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace todkit {

struct SlotDef {
    std::string name;
    /// Intents listing this slot as required; derived from the intents at load time.
    std::set<std::string> is_required_for;
    /// Empty means free-form.
    std::vector<std::string> possible_values;
    std::optional<std::string> description;
    /// Extra keywords the user simulator treats as a mention of this slot.
    std::vector<std::string> aliases;

    friend bool operator==(const SlotDef&, const SlotDef&) = default;
};

struct IntentDef {
    std::string name;
    bool is_transactional = false;
    std::vector<std::string> required_slots;
    std::vector<std::string> optional_slots;

    bool is_required(std::string_view slot) const;
    /// required_slots followed by optional_slots.
    std::vector<std::string> all_slots() const;
    /// Canonical slot name for `slot` (matched by name key), if the intent accepts it.
    std::optional<std::string> accepts(std::string_view slot) const;

    friend bool operator==(const IntentDef&, const IntentDef&) = default;
};

struct DomainSchema {
    std::string domain_name;
    std::vector<IntentDef> intents;
    std::vector<SlotDef> slots;

    const IntentDef* find_intent(std::string_view name) const;
    const SlotDef* find_slot(std::string_view name) const;

    friend bool operator==(const DomainSchema&, const DomainSchema&) = default;
};

/// Parses and validates one schema document. Throws MalformedDocument on
/// syntax errors and SchemaViolation on invariant breaches.
DomainSchema load_schema(std::istream& source);
DomainSchema load_schema_file(const std::filesystem::path& path);
DomainSchema schema_from_json(const nlohmann::json& doc);
nlohmann::ordered_json schema_to_json(const DomainSchema& schema);

struct ResolvedIntent {
    std::shared_ptr<const DomainSchema> domain;
    const IntentDef* intent = nullptr;
};

/// Immutable set of domain schemas. Safe to share between sessions.
class SchemaRegistry {
public:
    SchemaRegistry() = default;
    explicit SchemaRegistry(std::vector<DomainSchema> schemas);

    /// Registration order.
    const std::vector<std::shared_ptr<const DomainSchema>>& domains() const { return domains_; }
    std::shared_ptr<const DomainSchema> find(std::string_view domain_name) const;
    const DomainSchema& at(std::string_view domain_name) const;
    bool empty() const { return domains_.empty(); }

    /// A registry restricted to the named domains, in the order given.
    SchemaRegistry subset(const std::vector<std::string>& domain_names) const;

    std::vector<std::string> intent_names() const;

private:
    std::vector<std::shared_ptr<const DomainSchema>> domains_;
};

/// Looks the method up by name key across every registered domain. Throws
/// AmbiguousIntent when two domains define the same normalized intent name.
std::optional<ResolvedIntent> resolve_intent(const SchemaRegistry& registry, std::string_view method);

/// Loads every *.json in `dir`, sorted by file name.
SchemaRegistry load_registry_dir(const std::filesystem::path& dir);

}  // namespace todkit
