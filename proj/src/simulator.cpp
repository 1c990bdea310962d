#include "todkit/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "todkit/error.hpp"
#include "todkit/text.hpp"
#include "todkit/validator.hpp"

namespace todkit {

const char* to_string(SimPhase p) noexcept {
    switch (p) {
        case SimPhase::Expressing: return "expressing";
        case SimPhase::AwaitingResult: return "awaiting_result";
        case SimPhase::Requesting: return "requesting";
        case SimPhase::Done: return "done";
    }
    return "?";
}

void check_goal(const UserGoal& goal, const SchemaRegistry& registry) {
    for (std::size_t i = 0; i < goal.goal_calls.size(); ++i) {
        const auto verdict = validate(goal.goal_calls[i], registry);
        if (!verdict.ok)
            throw SchemaViolation("goal_calls[" + std::to_string(i) + "]",
                                  std::string("goal call fails validation: ") + to_string(verdict.errors[0].kind));
    }
    for (const auto& [index, slots] : goal.request_slots)
        if (index >= goal.goal_calls.size())
            throw SchemaViolation("request_slots", "goal_index " + std::to_string(index) + " out of range");
}

UserGoal goal_from_json(const nlohmann::json& j) {
    UserGoal goal;
    try {
        for (const auto& c : j.at("goal_calls")) {
            auto call = parse_call_prefix(c.get<std::string>());
            if (!call) throw SchemaViolation("goal_calls", "unparsable call " + c.dump());
            call->raw_span = {};
            goal.goal_calls.push_back(canonicalize(std::move(*call)));
        }
        if (auto it = j.find("request_slots"); it != j.end())
            for (const auto& r : *it) {
                auto& slots = goal.request_slots[r.at("goal_index").get<std::size_t>()];
                for (const auto& s : r.at("slots")) slots.push_back(s.get<std::string>());
            }
        if (auto it = j.find("closing_utterance"); it != j.end()) goal.closing_utterance = it->get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedDocument(std::string("user goal: ") + e.what());
    }
    return goal;
}

nlohmann::ordered_json goal_to_json(const UserGoal& goal) {
    nlohmann::ordered_json j;
    j["goal_calls"] = nlohmann::ordered_json::array();
    for (const auto& c : goal.goal_calls) j["goal_calls"].push_back(serialize(canonicalize(c)));
    j["request_slots"] = nlohmann::ordered_json::array();
    for (const auto& [index, slots] : goal.request_slots)
        j["request_slots"].push_back({{"goal_index", index}, {"slots", slots}});
    j["closing_utterance"] = goal.closing_utterance;
    return j;
}

SimulatorState initial_state(const UserGoal& goal) {
    SimulatorState s;
    if (goal.goal_calls.empty()) s.phase = SimPhase::Done;
    return s;
}

std::vector<std::string> detect_requested_slots(std::string_view system_text, const IntentDef& intent,
                                                const SchemaRegistry& registry) {
    const auto resolved = resolve_intent(registry, intent.name);
    const DomainSchema* schema = resolved ? resolved->domain.get() : nullptr;

    std::vector<std::pair<std::size_t, std::string>> hits;
    for (const auto& slot : intent.all_slots()) {
        std::vector<std::string> terms{text::name_phrase(slot), text::to_lower(slot)};
        if (schema)
            if (const SlotDef* def = schema->find_slot(slot))
                for (const auto& a : def->aliases) terms.push_back(text::to_lower(text::trim(a)));
        std::size_t best = std::string_view::npos;
        for (const auto& term : terms) best = std::min(best, text::find_word(system_text, term));
        if (best != std::string_view::npos) hits.emplace_back(best, slot);
    }
    std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> out;
    for (auto& [pos, slot] : hits) out.push_back(std::move(slot));
    return out;
}

namespace {

const std::regex kClockTime(R"(^([01]?\d|2[0-3]):([0-5]\d)$)");

std::string twelve_hour(const std::string& value) {
    std::smatch m;
    if (!std::regex_match(value, m, kClockTime)) return {};
    int hour = std::stoi(m[1].str());
    const std::string minutes = m[2].str();
    const char* suffix = hour >= 12 ? "PM" : "AM";
    hour %= 12;
    if (hour == 0) hour = 12;
    return std::to_string(hour) + (minutes == "00" ? "" : ":" + minutes) + " " + suffix;
}

std::string spoken_item(const std::string& v) {
    const std::string alt = twelve_hour(v);
    return alt.empty() ? v : v + " (" + alt + ")";
}

std::string intent_phrase(std::string_view method) {
    std::string out;
    for (std::size_t i = 0; i < method.size(); ++i) {
        const char c = method[i];
        if (c == '_' || c == '-') {
            out.push_back(' ');
            continue;
        }
        if (std::isupper(static_cast<unsigned char>(c)) && i > 0 && method[i - 1] != '_' &&
            !std::isupper(static_cast<unsigned char>(method[i - 1])))
            out.push_back(' ');
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

bool has_confirmation_cue(std::string_view text) {
    static const std::regex cue(
        R"(\b(confirm|is that (correct|right)|is this (correct|right)|does that sound|shall i|should i go ahead|would you like me to (book|reserve|proceed|go ahead)))",
        std::regex::icase);
    return std::regex_search(text.begin(), text.end(), cue);
}

/// Reveal order: the intent's required slots, then its optional slots, each
/// kept only if the goal call carries it.
std::vector<std::string> reveal_order(const ApiCall& call, const IntentDef* intent) {
    std::vector<std::string> order;
    auto add = [&](const std::string& name) {
        for (const auto& o : order)
            if (text::name_key(o) == text::name_key(name)) return;
        if (const auto* p = call.find(name)) order.push_back(p->name);
    };
    if (intent) {
        for (const auto& s : intent->required_slots) add(s);
        for (const auto& s : intent->optional_slots) add(s);
    }
    for (const auto& p : call.params) add(p.name);
    return order;
}

std::string describe(const ParamTriple& p, bool capitalize) {
    std::string s = std::string(capitalize ? "The " : "the ") + text::name_phrase(p.name) + " is " + speak_value(p);
    return s;
}

std::string reveal_sentence(const ApiCall& call, const std::vector<std::string>& slots) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < slots.size(); ++i) parts.push_back(describe(*call.find(slots[i]), i == 0));
    return text::join(parts, " and ") + ".";
}

template <std::size_t N>
const char* pick(const char* const (&bank)[N], std::size_t salt) {
    return bank[salt % N];
}

const char* const kOpeners[] = {"Hi, I'd like to ", "Hello, I want to ", "Hey, I need to "};
const char* const kFollowOpeners[] = {"Thanks. Next, I'd like to ", "Great. I also want to ",
                                      "Okay. Now I need to "};
const char* const kRequestLead[] = {"Can you tell me the ", "What is the ", "Could you also give me the "};
const char* const kAffirm[] = {"Yes, that's correct.", "Yes, that sounds right.", "Yes, please go ahead."};

std::string open_goal(SimulatorState& s, const UserGoal& goal, const SchemaRegistry& registry, bool follow_up,
                      std::size_t salt) {
    const ApiCall& call = goal.goal_calls[s.current_goal];
    const auto resolved = resolve_intent(registry, call.method);
    const auto order = reveal_order(call, resolved ? resolved->intent : nullptr);
    std::string out = std::string(follow_up ? pick(kFollowOpeners, salt) : pick(kOpeners, salt)) +
                      intent_phrase(resolved ? resolved->intent->name : call.method) + ".";
    std::vector<std::string> volunteer;
    for (const auto& slot : order) {
        if (volunteer.size() == kMaxSlotsPerTurn) break;
        if (!s.revealed_slots.count({s.current_goal, slot})) volunteer.push_back(slot);
    }
    for (const auto& v : volunteer) s.revealed_slots.insert({s.current_goal, v});
    if (!volunteer.empty()) out += " " + reveal_sentence(call, volunteer);
    s.goal_opened = true;
    s.phase = SimPhase::Expressing;
    return out;
}

}  // namespace

std::string speak_value(const ParamTriple& p) {
    std::vector<std::string> items;
    for (const auto& v : p.values) items.push_back(spoken_item(v));
    switch (p.op) {
        case Operator::AtLeast: return "at least " + text::join(items, " or ");
        case Operator::AtMost: return "at most " + text::join(items, " or ");
        case Operator::OneOf: return "one of " + text::join(items, " or ");
        case Operator::Not: return "anything but " + text::join(items, " or ");
        case Operator::EqualTo:
        case Operator::None: break;
    }
    return text::join(items, " or ");
}

UserTurn next_user_turn(const SimulatorState& state, const UserGoal& goal,
                        std::optional<std::string_view> last_system_turn, const SchemaRegistry& registry) {
    if (state.phase == SimPhase::Done) throw ContractViolation("simulator already finished its goals");

    SimulatorState s = state;
    const std::string_view system_text = last_system_turn.value_or(std::string_view{});
    const std::size_t salt = s.current_goal + s.revealed_slots.size() + s.pending_requests.size();
    const std::size_t revealed_before = s.revealed_slots.size();
    bool progressed = false;

    bool executed = false;
    try {
        executed = extract_api_call(system_text).has_value();
    } catch (const ParseError&) {
    }
    if (executed && s.phase != SimPhase::Requesting) {
        s.phase = SimPhase::Requesting;
        auto it = goal.request_slots.find(s.current_goal);
        s.pending_requests = it == goal.request_slots.end() ? std::vector<std::string>{} : it->second;
        progressed = true;
    }

    std::string utterance;
    if (s.phase == SimPhase::Requesting) {
        if (!s.pending_requests.empty()) {
            const std::string slot = s.pending_requests.front();
            s.pending_requests.erase(s.pending_requests.begin());
            utterance = std::string(pick(kRequestLead, salt)) + text::name_phrase(slot) + "?";
        } else {
            ++s.current_goal;
            s.goal_opened = false;
            if (s.current_goal >= goal.goal_calls.size()) {
                s.phase = SimPhase::Done;
                utterance = goal.closing_utterance;
            } else {
                utterance = open_goal(s, goal, registry, true, salt);
            }
        }
        progressed = true;
    } else if (!s.goal_opened) {
        utterance = open_goal(s, goal, registry, s.current_goal > 0, salt);
    } else {
        const ApiCall& call = goal.goal_calls[s.current_goal];
        const auto resolved = resolve_intent(registry, call.method);
        std::vector<std::string> asked;
        if (resolved)
            for (const auto& slot : detect_requested_slots(system_text, *resolved->intent, registry))
                if (const auto* p = call.find(slot)) asked.push_back(p->name);
        const bool all_known = std::all_of(asked.begin(), asked.end(), [&](const std::string& slot) {
            return s.revealed_slots.count({s.current_goal, slot}) != 0;
        });

        if (has_confirmation_cue(system_text) && all_known) {
            utterance = pick(kAffirm, salt);
        } else if (!asked.empty()) {
            if (asked.size() > kMaxSlotsPerTurn) asked.resize(kMaxSlotsPerTurn);
            for (const auto& slot : asked) s.revealed_slots.insert({s.current_goal, slot});
            utterance = reveal_sentence(call, asked);
        } else {
            std::vector<std::string> volunteer;
            for (const auto& slot : reveal_order(call, resolved ? resolved->intent : nullptr)) {
                if (volunteer.size() == kMaxSlotsPerTurn) break;
                if (!s.revealed_slots.count({s.current_goal, slot})) volunteer.push_back(slot);
            }
            if (volunteer.empty()) {
                s.phase = SimPhase::AwaitingResult;
                utterance = "Yes, please go ahead.";
            } else {
                for (const auto& slot : volunteer) s.revealed_slots.insert({s.current_goal, slot});
                utterance = reveal_sentence(call, volunteer);
            }
        }
    }

    if (s.revealed_slots.size() != revealed_before) progressed = true;
    s.idle_turns = progressed ? 0 : s.idle_turns + 1;
    if (s.idle_turns >= kStuckAfter)
        throw StuckDialog("no progress on goal " + std::to_string(s.current_goal) + " for " +
                          std::to_string(kStuckAfter) + " turns");
    return UserTurn{std::move(utterance), std::move(s)};
}

UserTurn ScriptedSimulator::next(const SimulatorState& state, const UserGoal& goal,
                                 std::optional<std::string_view> last_system_turn, const SchemaRegistry& registry,
                                 const std::vector<Turn>&, const std::string&) {
    return next_user_turn(state, goal, last_system_turn, registry);
}

LlmSimulator::LlmSimulator(std::shared_ptr<Backend> backend, std::string model_id)
    : backend_(std::move(backend)), model_id_(std::move(model_id)) {}

std::string LlmSimulator::render_prompt(const SimulatorState& next_state, const UserGoal& goal,
                                        const SchemaRegistry& registry, const std::vector<Turn>& history) {
    std::vector<std::string> domains;
    for (const auto& d : registry.domains()) domains.push_back(d->domain_name);
    const std::size_t g = next_state.current_goal;
    const bool has_next = g < goal.goal_calls.size();
    std::string next_slots = "N/A";
    if (!next_state.pending_requests.empty()) next_slots = text::join(next_state.pending_requests, ", ");
    std::string last_call = "N/A";
    if (g > 0 && g - 1 < goal.goal_calls.size()) last_call = serialize(goal.goal_calls[g - 1]);

    std::string out = "You are a User Simulator for the domain: " + text::join(domains, ", ") + "\n";
    out += "Generate a realistic user response based on the following information:\n";
    out += "Next API Call: " + (has_next ? serialize(goal.goal_calls[g]) : std::string("N/A")) + "\n";
    out += "Next required slots: " + next_slots + "\n";
    out += "Last API Call: " + last_call + "\n";
    out += "Dialog History:\n" + render_history(history);
    if (next_state.phase == SimPhase::Done) out += "All goals are complete; close the conversation politely.\n";
    return out;
}

UserTurn LlmSimulator::next(const SimulatorState& state, const UserGoal& goal,
                            std::optional<std::string_view> last_system_turn, const SchemaRegistry& registry,
                            const std::vector<Turn>& history, const std::string& session_id) {
    UserTurn scripted = next_user_turn(state, goal, last_system_turn, registry);
    GenerationRequest req;
    req.messages = {{"system", render_prompt(scripted.state, goal, registry, history)},
                    {"user", "Write the next User turn only."}};
    req.model_id = model_id_;
    req.max_tokens = 256;
    req.session_id = session_id + "/user";
    req.turn_index = 0;
    for (const auto& t : history) req.turn_index += t.role == Role::User ? 1 : 0;
    scripted.utterance = text::trim(backend_->generate(req).text);
    return scripted;
}

}  // namespace todkit
