#include "todkit/prompting.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "todkit/digest.hpp"
#include "todkit/error.hpp"
#include "todkit/text.hpp"
#include "todkit/validator.hpp"

namespace todkit {

namespace {

std::string domain_list(const std::vector<DomainSchema>& schemas) {
    std::vector<std::string> names;
    for (const auto& s : schemas) names.push_back(s.domain_name);
    return text::join(names, ", ");
}

std::string sorted_join(std::vector<std::string> names, std::string_view sep) {
    std::sort(names.begin(), names.end());
    return text::join(names, sep);
}

const char* const kGuidelines[] = {
    "Please avoid asking for too many slots in one turn; ideally, ask one slot at a time.",
    "Don't overwhelm the User with too many questions or choices in one turn.",
    "Confirm the slot values with the User before finalizing the API Call.",
    "Follow the structure of API Call from the above example whenever you are making an API Call.",
    "If you're unsure about something, it's always better to ask or confirm with the User.",
    "Do not provide all the information in the search results to the User. Provide details only if the User requests them.",
    "If you feel the User is confused, guide the User with relevant suggestions and ensure it is relevant to their current intent.",
    "You generate only one system response at a time and do not produce search results yourself; search results will be provided to you.",
};

}  // namespace

std::string render_schema_block(const DomainSchema& schema, const std::string& end_line) {
    std::ostringstream out;
    out << "Here is a Schema for the " << schema.domain_name << "\n\n";
    out << "service_name: " << schema.domain_name << "\n\n";
    out << "Intents\n\n";
    for (std::size_t i = 0; i < schema.intents.size(); ++i) {
        const auto& intent = schema.intents[i];
        out << "    " << (i + 1) << ".\n";
        out << "    name: " << intent.name << "\n";
        out << "    is_transactional: " << (intent.is_transactional ? "True" : "False") << "\n";
        out << "    required_slots: " << text::join(intent.required_slots, ", ") << "\n";
        out << "    optional_slots: " << text::join(intent.optional_slots, ", ") << "\n\n";
    }
    out << "Slots\n\n";
    for (const auto& slot : schema.slots) {
        out << "        slot_name: " << slot.name << "\n";
        out << "        possible_values: " << text::join(slot.possible_values, ", ") << "\n\n";
    }
    out << end_line << "\n";
    return out.str();
}

PromptP1 render_p1(const DomainSchema& source_schema, const DialogTranscript& source_dialog,
                   const std::vector<DomainSchema>& target_schemas) {
    if (source_dialog.turns.empty()) throw EmptyDialog("source dialog has no turns");
    if (target_schemas.empty()) throw ContractViolation("render_p1 needs at least one target schema");

    const std::string& x = source_schema.domain_name;
    const std::string y = domain_list(target_schemas);
    std::ostringstream out;
    out << "Task Description:\n\n"
        << "Your task is to generate a dialog conversation between a User and a System based on a given "
           "domain schema. I will provide a Schema for "
        << x
        << ", which defines the structure and relevant entities, along with a corresponding dialog "
           "conversation for reference. Your goal is to analyze the relationship between the dialog and the "
           "schema and then generate a coherent and contextually appropriate dialog conversation for "
        << y << " while maintaining consistency with its schema.\n\n";
    out << render_schema_block(source_schema, "end of schema for " + x) << "\n";
    out << "<< Dialog Conversation >>\n" << render_history(source_dialog.turns) << "\n";
    out << "Now, understand the above conversation structure between a User and a System. You will be given "
           "a new Schema for "
        << y
        << ". You have to generate a full-fledged conversation for the new domain that will be structured "
           "like the example above.\n\n";
    for (const auto& target : target_schemas)
        out << render_schema_block(target, "end of schema for " + target.domain_name) << "\n";
    out << "Based on the above instructions and example conversation from the " << x
        << ", learn how to generate the full conversation for the new " << y << " domain.\n\n"
        << "End of Instructions.\n";

    return PromptP1{source_schema, source_dialog, target_schemas, out.str()};
}

PromptP2 render_p2(const std::vector<DomainSchema>& target_schemas, const DialogTranscript& example_dialog,
                   const std::vector<Turn>& history) {
    const std::string d = domain_list(target_schemas);
    std::ostringstream out;
    out << "Task Description:\n\n"
        << "Think of yourself as an expert chat assistant specialized in the " << d
        << " domain. Your task is to generate the most natural and helpful responses for a given "
           "task-oriented dialog context. I will provide Schema for "
        << d
        << ", one sample conversation between a System and a User, optionally, search results from the "
           "database. Understand the dialog relation to Schema. You can request slot values from the User to "
           "fulfill the User's current intent. Remember that required slots are more important than optional "
           "slots. When making API calls, use column names from the Schema as parameters. Match the required "
           "and optional slots with the column names and use them in API calls. Before making the call, "
           "ensure you've gathered all required slots from the User. You can skip unnecessary parameters.\n\n";
    for (const auto& schema : target_schemas) out << render_schema_block(schema, "end of schema") << "\n";
    out << "<< Dialog Conversation >>\n" << render_history(example_dialog.turns) << "\n";
    out << "Understand the above structure of conversation between a User and a System. Learn how to "
           "interact with the User and generate the most human-like conversational response to the User's "
           "intent. You may need to make API Calls and use the API Call results. Based on the above "
           "instructions and examples from the "
        << d
        << " domain, learn how to interact with a User to generate the most human-like conversational "
           "response to the User's current intent.\n\n"
        << "End of Instructions.\n\n";
    out << "Here are a few general Guidelines to follow:\n\n";
    for (const char* g : kGuidelines) out << "- " << g << "\n\n";
    out << "Conversation history:\n" << render_history(history);

    return PromptP2{target_schemas, example_dialog, history, out.str()};
}

DialogTranscript parse_stage1_completion(const std::string& completion) {
    DialogTranscript t;
    std::istringstream in(completion);
    std::string raw;
    auto strip_markup = [](std::string s) {
        s = text::trim(s);
        while (!s.empty() && (s.front() == '*' || s.front() == '-' || s.front() == '#')) s.erase(0, 1);
        s = text::trim(s);
        return s;
    };
    auto after_prefix = [](const std::string& s, std::size_t n) {
        std::string rest = s.substr(n);
        while (!rest.empty() && rest.front() == '*') rest.erase(0, 1);
        return text::trim(rest);
    };
    while (std::getline(in, raw)) {
        const std::string line = strip_markup(raw);
        if (line.empty()) continue;
        Turn turn;
        if (text::starts_with_ci(line, "User:")) {
            turn.role = Role::User;
            turn.text = after_prefix(line, 5);
        } else if (text::starts_with_ci(line, "System:")) {
            turn.role = Role::System;
            turn.text = after_prefix(line, 7);
        } else if (text::starts_with_ci(line, "RealTOD:")) {
            turn.role = Role::System;
            turn.text = after_prefix(line, 8);
        } else if (text::starts_with_ci(line, "Assistant:")) {
            turn.role = Role::System;
            turn.text = after_prefix(line, 10);
        } else if (line.rfind(kCallPrefix, 0) == 0) {
            turn.role = Role::System;
            turn.text = line;
        } else if (text::starts_with_ci(line, "Search Results:")) {
            turn.role = Role::SearchResults;
            turn.text = line;
        } else {
            if (!t.turns.empty()) t.turns.back().text += "\n" + line;
            continue;
        }
        turn.timestamp = t.turns.size();
        t.turns.push_back(std::move(turn));
    }
    for (auto& turn : t.turns) {
        if (turn.role != Role::System) continue;
        try {
            if (auto call = extract_api_call(turn.text)) {
                turn.role = Role::ApiCall;
                turn.call = canonicalize(std::move(*call));
            }
        } catch (const ParseError&) {
        }
    }
    return t;
}

std::string render_stage1_dialog(const DialogTranscript& t) { return render_history(t.turns); }

bool exemplar_quality_check(const DialogTranscript& t, const SchemaRegistry& targets) {
    if (t.turns.size() < 4 || !roles_alternate(t.turns)) return false;
    if (t.count(Role::User) == 0) return false;
    for (const auto& turn : t.turns) {
        if (turn.role != Role::ApiCall || !turn.call) continue;
        try {
            if (validate(*turn.call, targets).ok) return true;
        } catch (const AmbiguousIntent&) {
        }
    }
    return false;
}

std::vector<SeedExemplar> load_seeds(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> subdirs;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_directory()) subdirs.push_back(entry.path());
    std::sort(subdirs.begin(), subdirs.end());
    std::vector<SeedExemplar> seeds;
    for (const auto& d : subdirs) {
        SeedExemplar seed;
        seed.dataset = d.filename().string();
        seed.schema = load_schema_file(d / "schema.json");
        auto dialogs = read_transcripts_file(d / "dialog.jsonl");
        if (dialogs.size() != 1) throw MalformedDocument(d.string() + ": expected exactly one seed dialog");
        seed.dialog = std::move(dialogs.front());
        seed.dialog.domains = {seed.schema.domain_name};
        seeds.push_back(std::move(seed));
    }
    return seeds;
}

const SeedExemplar& choose_seed(const std::vector<SeedExemplar>& seeds, const std::vector<DomainSchema>& targets) {
    if (seeds.empty()) throw ContractViolation("no seed exemplars available");
    std::size_t target_intents = 0;
    for (const auto& t : targets) target_intents += t.intents.size();
    const SeedExemplar* best = nullptr;
    std::size_t best_gap = 0;
    for (const auto& s : seeds) {
        const std::size_t n = s.schema.intents.size();
        const std::size_t gap = n > target_intents ? n - target_intents : target_intents - n;
        if (!best || gap < best_gap ||
            (gap == best_gap && s.schema.domain_name < best->schema.domain_name)) {
            best = &s;
            best_gap = gap;
        }
    }
    return *best;
}

std::string exemplar_cache_key(const std::vector<std::string>& domains, const std::string& model_id) {
    return sha256_hex(sorted_join(domains, "\n") + "\n--\n" + model_id + "\n--\n" + kTemplateVersion).substr(0, 32);
}

std::string exemplar_session_id(const std::vector<std::string>& domains) {
    return "exemplar:" + sorted_join(domains, "+");
}

ExemplarCache::ExemplarCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
}

bool ExemplarCache::contains(const std::string& key) const {
    std::lock_guard lock(mu_);
    return entries_.count(key) != 0;
}

DialogTranscript ExemplarCache::get_or_generate(const std::string& key, const SchemaRegistry& targets,
                                                const std::function<DialogTranscript()>& generate) {
    std::promise<DialogTranscript> promise;
    std::shared_future<DialogTranscript> future;
    bool owner = false;
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            future = it->second;
        } else {
            future = promise.get_future().share();
            entries_.emplace(key, future);
            owner = true;
        }
    }
    if (!owner) return future.get();

    try {
        std::optional<DialogTranscript> result;
        if (dir_) {
            const auto path = *dir_ / (key + ".jsonl");
            if (std::filesystem::exists(path)) {
                auto stored = read_transcripts_file(path);
                if (stored.size() == 1 && exemplar_quality_check(stored.front(), targets))
                    result = std::move(stored.front());
            }
        }
        if (!result) {
            result = generate();
            if (!exemplar_quality_check(*result, targets))
                throw ContractViolation("generated exemplar fails the quality check");
            if (dir_) {
                DialogTranscript copy = *result;
                copy.dialog_id = key;
                write_transcripts_file(*dir_ / (key + ".jsonl"), {copy});
            }
        }
        promise.set_value(*result);
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mu_);
        entries_.erase(key);
        throw;
    }
    return future.get();
}

DialogTranscript generate_exemplar(Backend& backend, const ExemplarRequest& request, ExemplarCache* cache) {
    if (!request.seed) throw ContractViolation("exemplar request without a seed");
    std::vector<std::string> domains;
    for (const auto& t : request.targets) domains.push_back(t.domain_name);
    const SchemaRegistry targets(request.targets);

    auto run = [&]() -> DialogTranscript {
        const PromptP1 p1 = render_p1(request.seed->schema, request.seed->dialog, request.targets);
        std::string last;
        for (int attempt = 0; attempt < kStage1Attempts; ++attempt) {
            GenerationRequest req;
            req.messages = {{"system", p1.rendered},
                            {"user", "Generate the full conversation now, one turn per line."}};
            req.model_id = request.model_id;
            req.max_tokens = request.max_tokens;
            req.session_id = exemplar_session_id(domains);
            req.turn_index = 0;
            req.attempt = static_cast<std::size_t>(attempt);
            last = backend.generate(req).text;
            DialogTranscript t = parse_stage1_completion(last);
            if (exemplar_quality_check(t, targets)) {
                t.dialog_id = exemplar_session_id(domains);
                t.domains = domains;
                return t;
            }
        }
        throw ExemplarGenerationFailed("stage-1 generation produced no usable example dialog after " +
                                           std::to_string(kStage1Attempts) + " attempts",
                                       last);
    };
    if (!cache) return run();
    return cache->get_or_generate(exemplar_cache_key(domains, request.model_id), targets, run);
}

}  // namespace todkit
