// Builds gold dialogs for the fixture corpus by letting the scripted user
// simulator talk to a rule-based system agent that knows the goal. Also
// writes seed exemplars and the golden prompt renderings.
//
//   todkit_make_gold <fixtures dir>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "todkit/corpus.hpp"
#include "todkit/error.hpp"
#include "todkit/orchestrator.hpp"
#include "todkit/prompting.hpp"
#include "todkit/search.hpp"
#include "todkit/simulator.hpp"
#include "todkit/text.hpp"
#include "todkit/validator.hpp"

namespace fs = std::filesystem;
using namespace todkit;

namespace {

std::string clock_12h(const std::string& v) {
    static const std::regex clock(R"(^([01]?\d|2[0-3]):([0-5]\d)$)");
    std::smatch m;
    if (!std::regex_match(v, m, clock)) return {};
    int h = std::stoi(m[1].str());
    const char* suffix = h >= 12 ? "PM" : "AM";
    h %= 12;
    if (h == 0) h = 12;
    return std::to_string(h) + ":" + m[2].str() + " " + suffix;
}

// How the agent says a looked-up value: "$39.00" for x.0 amounts, 12-hour clock times.
std::string surface(const std::string& v) {
    static const std::regex whole(R"(^(\d+)\.0$)");
    std::smatch m;
    if (std::regex_match(v, m, whole)) return "$" + m[1].str() + ".00";
    if (auto c = clock_12h(v); !c.empty()) return c;
    return v;
}

std::string phrase(const std::string& slot) { return text::name_phrase(slot); }

std::vector<std::string> ordered_slots(const ApiCall& call, const IntentDef& intent) {
    std::vector<std::string> order;
    for (const auto* group : {&intent.required_slots, &intent.optional_slots})
        for (const auto& s : *group)
            if (const auto* p = call.find(s)) order.push_back(p->name);
    return order;
}

struct Gold {
    DialogTranscript transcript;
    std::vector<GoldRequest> requests;
};

Gold build_gold(const std::string& dialog_id, const std::vector<std::string>& domains, const UserGoal& goal,
                const ReplayTable& table, const SchemaRegistry& registry) {
    Gold g;
    g.transcript.dialog_id = dialog_id;
    g.transcript.domains = domains;
    auto append = [&](Role role, std::string t) -> Turn& {
        Turn turn;
        turn.role = role;
        turn.text = std::move(t);
        turn.timestamp = g.transcript.turns.size();
        g.transcript.turns.push_back(std::move(turn));
        return g.transcript.turns.back();
    };

    SearchProvider provider = SearchProvider::replay(table);
    std::map<std::size_t, std::vector<Row>> rows_of;
    std::set<std::size_t> confirmed;
    SimulatorState state = initial_state(goal);
    std::optional<std::string> last;

    for (int guard = 0; guard < 200; ++guard) {
        UserTurn ut = next_user_turn(state, goal, last, registry);
        state = ut.state;
        const std::size_t user_index = g.transcript.turns.size();
        append(Role::User, ut.utterance);

        if (state.phase == SimPhase::Done) {
            append(Role::System, "You're welcome. Have a great day!");
            return g;
        }
        const std::size_t gi = state.current_goal;
        const ApiCall& call = goal.goal_calls[gi];
        const auto resolved = resolve_intent(registry, call.method);
        const IntentDef& intent = *resolved->intent;

        if (state.phase == SimPhase::Requesting && ut.utterance.ends_with("?")) {
            std::string asked;
            if (auto it = goal.request_slots.find(gi); it != goal.request_slots.end())
                for (const auto& s : it->second)
                    if (text::contains_word(ut.utterance, phrase(s))) asked = s;
            if (asked.empty()) throw ContractViolation(dialog_id + ": cannot tell which slot was requested");
            const auto& rows = rows_of.at(gi);
            if (rows.empty() || !rows.front().contains(asked))
                throw ContractViolation(dialog_id + ": no row value for requested slot " + asked);
            const std::string value = cell_text(rows.front()[asked]);
            g.requests.push_back({asked, value, user_index});
            std::string reply = "The " + phrase(asked) + " is " + surface(value) +
                                ". Is there anything else I can help you with?";
            last = reply;
            append(Role::System, std::move(reply));
            continue;
        }

        std::vector<std::string> missing;
        for (const auto& s : ordered_slots(call, intent))
            if (!state.revealed_slots.count({gi, s})) missing.push_back(s);
        if (!missing.empty()) {
            if (missing.size() > 2) missing.resize(2);
            std::string q = missing.size() == 1 ? "Sure. What " + phrase(missing[0]) + " would you like?"
                                                : "Sure. What " + phrase(missing[0]) + " and " + phrase(missing[1]) +
                                                      " would you like?";
            last = q;
            append(Role::System, std::move(q));
            continue;
        }
        if (intent.is_transactional && !confirmed.count(gi)) {
            confirmed.insert(gi);
            std::vector<std::string> parts;
            for (const auto& s : ordered_slots(call, intent))
                parts.push_back(phrase(s) + " is " + speak_value(*call.find(s)));
            std::string q = "Please confirm the following details: " + text::join(parts, ", ") + ". Is that correct?";
            last = q;
            append(Role::System, std::move(q));
            continue;
        }

        const std::string call_text = serialize(call);
        Turn& api = append(Role::ApiCall, call_text);
        api.call = call;
        api.attempt_trail.push_back({call_text, validate(call, registry)});
        const auto rows = provider.lookup(call, registry);
        rows_of[gi] = rows;
        append(Role::SearchResults, render_search_results(rows));
        std::string reply;
        if (intent.is_transactional) {
            reply = "Your request has been completed successfully. Is there anything else I can help you with?";
        } else if (rows.empty()) {
            reply = "I could not find anything matching that. Is there anything else I can help you with?";
        } else {
            const auto& first = *rows.front().begin();
            reply = "I found " + std::to_string(rows.size()) + (rows.size() == 1 ? " result" : " results") +
                    ". The top one has " + phrase(rows.front().begin().key()) + " " + cell_text(first) +
                    ". Is there anything else I can help you with?";
        }
        last = call_text + "\n" + reply;
        append(Role::System, std::move(reply));
    }
    throw ContractViolation(dialog_id + ": dialog did not finish");
}

void write_file(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << s;
}

// The oracle replay must reproduce every gold dialog turn for turn.
void self_check(const Corpus& corpus) {
    auto backend = make_replay_backend(oracle_script(corpus));
    const auto seeds = load_seeds(corpus.root / "seeds");
    for (const auto& item : corpus.items) {
        const SchemaRegistry reg = corpus.registry_for(item);
        std::vector<DomainSchema> targets;
        for (const auto& d : reg.domains()) targets.push_back(*d);
        const auto exemplar = generate_exemplar(*backend, {&choose_seed(seeds, targets), targets, "oracle", 2048});
        SessionOptions opts;
        const auto t = run_session({item.dialog_id, item.domains, item.goal}, reg, *backend, exemplar,
                                   SearchProvider::replay(item.replay_results), opts);
        const auto& gold = item.gold_transcript->turns;
        bool same = t.turns.size() == gold.size();
        for (std::size_t i = 0; same && i < gold.size(); ++i)
            same = t.turns[i].role == gold[i].role && t.turns[i].text == gold[i].text;
        if (!same) throw ContractViolation(item.dialog_id + ": oracle replay diverges from the gold dialog");
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: todkit_make_gold <fixtures dir>\n";
        return 2;
    }
    const fs::path root = argv[1];
    try {
        // Seeds first: the corpus self-check needs them.
        for (const auto& entry : fs::directory_iterator(root / "seed_specs")) {
            const fs::path dir = entry.path();
            const DomainSchema schema = load_schema_file(dir / "schema.json");
            const SchemaRegistry reg({schema});
            std::ifstream gin(dir / "goal.json"), rin(dir / "results.json");
            const auto gj = nlohmann::json::parse(gin);
            CorpusItem item;
            item.goal = goal_from_json(gj);
            results_from_json(nlohmann::ordered_json::parse(rin), item);
            Gold g = build_gold(gj.at("dialog_id"), {schema.domain_name}, item.goal, item.replay_results, reg);
            const fs::path out = root / "corpus" / "seeds" / dir.filename();
            write_file(out / "schema.json", schema_to_json(schema).dump(2) + "\n");
            write_transcripts_file(out / "dialog.jsonl", {g.transcript});
        }

        Corpus corpus = load_corpus(root / "corpus");
        for (auto& item : corpus.items) {
            Gold g = build_gold(item.dialog_id, item.domains, item.goal, item.replay_results,
                                corpus.registry_for(item));
            item.gold_requests = g.requests;
            write_transcripts_file(root / "corpus" / "gold" / (item.dialog_id + ".jsonl"), {g.transcript});
            write_file(root / "corpus" / "results" / (item.dialog_id + ".json"), results_to_json(item).dump(2) + "\n");
        }
        corpus = load_corpus(root / "corpus");
        self_check(corpus);

        // Golden prompts over the three-domain item.
        const CorpusItem& item = *corpus.find("multi_01");
        const SchemaRegistry reg = corpus.registry_for(item);
        std::vector<DomainSchema> targets;
        for (const auto& d : reg.domains()) targets.push_back(*d);
        const auto seeds = load_seeds(corpus.root / "seeds");
        const SeedExemplar& seed = choose_seed(seeds, targets);
        write_file(root / "golden" / kTemplateVersion / "p1.txt", render_p1(seed.schema, seed.dialog, targets).rendered);
        const DialogTranscript example = parse_stage1_completion(render_stage1_dialog(*item.gold_transcript));
        const std::vector<Turn> history(item.gold_transcript->turns.begin(), item.gold_transcript->turns.begin() + 3);
        write_file(root / "golden" / kTemplateVersion / "p2.txt", render_p2(targets, example, history).rendered);

        std::size_t calls = 0, requests = 0;
        for (const auto& it : corpus.items) {
            calls += it.gold_calls().size();
            requests += it.gold_requests.size();
        }
        std::cout << corpus.items.size() << " items, " << calls << " gold calls, " << requests
                  << " gold requests\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
