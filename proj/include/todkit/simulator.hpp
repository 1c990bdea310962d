#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "todkit/apicall.hpp"
#include "todkit/backend.hpp"
#include "todkit/schema.hpp"
#include "todkit/transcript.hpp"

namespace todkit {

/// What the simulated user wants: goal calls to get executed in order, and
/// per goal the slots it will ask about once that goal is done.
struct UserGoal {
    std::vector<ApiCall> goal_calls;
    std::map<std::size_t, std::vector<std::string>> request_slots;
    std::string closing_utterance = "No, thank you for your help.";
};

/// Throws SchemaViolation if a goal call fails validation or a request key is
/// out of range.
void check_goal(const UserGoal& goal, const SchemaRegistry& registry);

/// {"goal_calls": [call text], "request_slots": [{"goal_index", "slots"}], "closing_utterance"}
UserGoal goal_from_json(const nlohmann::json& j);
nlohmann::ordered_json goal_to_json(const UserGoal& goal);

enum class SimPhase { Expressing, AwaitingResult, Requesting, Done };

const char* to_string(SimPhase p) noexcept;

struct SimulatorState {
    std::size_t current_goal = 0;
    std::set<std::pair<std::size_t, std::string>> revealed_slots;
    std::vector<std::string> pending_requests;
    SimPhase phase = SimPhase::Expressing;
    bool goal_opened = false;
    std::size_t idle_turns = 0;

    friend bool operator==(const SimulatorState&, const SimulatorState&) = default;
};

SimulatorState initial_state(const UserGoal& goal);

struct UserTurn {
    std::string utterance;
    SimulatorState state;
};

inline constexpr std::size_t kMaxSlotsPerTurn = 2;
inline constexpr std::size_t kStuckAfter = 6;

/// Scripted user policy. Any call in `last_system_turn` counts as the system
/// acting on the current goal. Throws StuckDialog after kStuckAfter
/// consecutive turns without progress, ContractViolation when already done.
UserTurn next_user_turn(const SimulatorState& state, const UserGoal& goal,
                        std::optional<std::string_view> last_system_turn, const SchemaRegistry& registry);

/// Slots of `intent` mentioned in `system_text` (by phrase, raw name or alias,
/// word-bounded), in text order, without duplicates.
std::vector<std::string> detect_requested_slots(std::string_view system_text, const IntentDef& intent,
                                                const SchemaRegistry& registry);

/// Surface form of a goal parameter value as the user says it; the raw
/// value always appears verbatim.
std::string speak_value(const ParamTriple& p);

/// Produces the next user utterance for a session.
class UserSimulator {
public:
    virtual ~UserSimulator() = default;
    virtual UserTurn next(const SimulatorState& state, const UserGoal& goal,
                          std::optional<std::string_view> last_system_turn, const SchemaRegistry& registry,
                          const std::vector<Turn>& history, const std::string& session_id) = 0;
};

class ScriptedSimulator final : public UserSimulator {
public:
    UserTurn next(const SimulatorState& state, const UserGoal& goal,
                  std::optional<std::string_view> last_system_turn, const SchemaRegistry& registry,
                  const std::vector<Turn>& history, const std::string& session_id) override;
};

/// State tracking from the scripted policy, wording from a generation backend
/// prompted with the next goal call, pending request slots and the history.
/// Requests are routed as (session_id + "/user", user turn number).
class LlmSimulator final : public UserSimulator {
public:
    LlmSimulator(std::shared_ptr<Backend> backend, std::string model_id);
    UserTurn next(const SimulatorState& state, const UserGoal& goal,
                  std::optional<std::string_view> last_system_turn, const SchemaRegistry& registry,
                  const std::vector<Turn>& history, const std::string& session_id) override;

    static std::string render_prompt(const SimulatorState& next_state, const UserGoal& goal,
                                     const SchemaRegistry& registry, const std::vector<Turn>& history);

private:
    std::shared_ptr<Backend> backend_;
    std::string model_id_;
};

}  // namespace todkit
