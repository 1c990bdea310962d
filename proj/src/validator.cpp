#include "todkit/validator.hpp"

#include <sstream>

#include "todkit/error.hpp"
#include "todkit/text.hpp"

namespace todkit {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::UnknownMethod: return "UnknownMethod";
        case ErrorKind::UnknownSlot: return "UnknownSlot";
        case ErrorKind::MissingRequiredSlot: return "MissingRequiredSlot";
    }
    return "?";
}

ValidationVerdict validate(const ApiCall& call, const SchemaRegistry& registry) {
    ValidationVerdict verdict;
    const auto resolved = resolve_intent(registry, call.method);
    if (!resolved) {
        verdict.errors.push_back({ErrorKind::UnknownMethod, call.method, {},
                                  text::nearest_names(call.method, registry.intent_names())});
        verdict.ok = false;
        return verdict;
    }
    const IntentDef& intent = *resolved->intent;

    std::vector<std::string> unused;
    for (const auto& slot : intent.all_slots())
        if (!call.find(slot)) unused.push_back(slot);

    for (const auto& p : call.params) {
        if (intent.accepts(p.name)) continue;
        verdict.errors.push_back(
            {ErrorKind::UnknownSlot, intent.name, {p.name}, text::nearest_names(p.name, unused)});
    }

    std::vector<std::string> missing;
    for (const auto& slot : intent.required_slots)
        if (!call.find(slot)) missing.push_back(slot);
    if (!missing.empty())
        verdict.errors.push_back({ErrorKind::MissingRequiredSlot, intent.name, missing, {}});

    verdict.ok = verdict.errors.empty();
    return verdict;
}

namespace {

std::string quoted_list(const std::vector<std::string>& names) {
    std::vector<std::string> q;
    for (const auto& n : names) q.push_back("\"" + n + "\"");
    return text::join(q, ", ");
}

}  // namespace

std::string feedback_message(const ValidationVerdict& verdict, const SchemaRegistry& registry) {
    if (verdict.ok) throw ContractViolation("feedback_message called with a passing verdict");

    std::ostringstream out;
    out << "The API call is invalid. Please fix the following error"
        << (verdict.errors.size() == 1 ? "" : "s") << ":\n";
    std::size_t n = 0;
    for (const auto& e : verdict.errors) {
        out << ++n << ". ";
        switch (e.kind) {
            case ErrorKind::UnknownMethod:
                out << "unknown method \"" << e.method << "\": it does not match any intent in the schema.";
                if (!e.suggestions.empty())
                    out << " Did you mean " << quoted_list(e.suggestions) << "?";
                else
                    out << " Valid methods are " << quoted_list(registry.intent_names()) << ".";
                break;
            case ErrorKind::UnknownSlot:
                out << "unknown parameter \"" << text::join(e.offending_names, "\", \"")
                    << "\" for method \"" << e.method << "\": it is not defined in the schema for this intent.";
                if (!e.suggestions.empty()) out << " Did you mean " << quoted_list(e.suggestions) << "?";
                break;
            case ErrorKind::MissingRequiredSlot:
                if (e.offending_names.size() == 1) {
                    out << "required parameter \"" << e.offending_names.front()
                        << "\" is missing for method \"" << e.method << "\".";
                } else {
                    out << "required parameters " << quoted_list(e.offending_names)
                        << " are missing for method \"" << e.method << "\".";
                }
                out << " Ask the User for the missing value if you do not have it.";
                break;
        }
        out << "\n";
    }
    out << "Re-emit the corrected call in the same format: "
           "APICall(method='<MethodName>', parameters={<slot_name>: <value>, ...})";
    return out.str();
}

}  // namespace todkit
