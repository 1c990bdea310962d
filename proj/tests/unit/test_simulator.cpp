#include <doctest.h>

#include "support.hpp"
#include "todkit/error.hpp"
#include "todkit/simulator.hpp"

using namespace todkit;

namespace {

const CorpusItem& item(const std::string& id) {
    const auto* it = testsupport::corpus().find(id);
    REQUIRE(it);
    return *it;
}

ApiCall call(const std::string& text) { return canonicalize(*extract_api_call(text)); }

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("single goal trace") {
    const auto& it = item("single_01");
    const auto reg = testsupport::corpus().registry_for(it);
    auto s = initial_state(it.goal);
    CHECK(s.phase == SimPhase::Expressing);

    auto t1 = next_user_turn(s, it.goal, std::nullopt, reg);
    CHECK(t1.utterance == "Hi, I'd like to get weather. The city is Vancouver and the date is 2024-03-02.");
    CHECK(t1.state.revealed_slots.size() == 2);

    auto t2 = next_user_turn(t1.state, it.goal, serialize(it.goal.goal_calls[0]), reg);
    CHECK(t2.state.phase == SimPhase::Requesting);
    CHECK(t2.utterance == "Could you also give me the temperature?");
    CHECK(t2.state.pending_requests.empty());

    auto t3 = next_user_turn(t2.state, it.goal, std::string_view("The temperature is 68."), reg);
    CHECK(t3.state.phase == SimPhase::Done);
    CHECK(t3.utterance == it.goal.closing_utterance);
    CHECK_THROWS_AS(next_user_turn(t3.state, it.goal, std::nullopt, reg), ContractViolation);
}

TEST_CASE("answers what the system asks, at most two slots per turn") {
    const auto& it = item("single_03");
    const auto reg = testsupport::corpus().registry_for(it);
    // Only the reservation, which has six required slots.
    UserGoal goal;
    goal.goal_calls = {it.goal.goal_calls.at(1)};
    const ApiCall& goal_call = goal.goal_calls[0];
    REQUIRE(goal_call.method == "ReserveCar");

    auto t1 = next_user_turn(initial_state(goal), goal, std::nullopt, reg);
    CHECK(t1.state.revealed_slots.size() == kMaxSlotsPerTurn);

    auto t2 = next_user_turn(t1.state, goal,
                             std::string_view("What time would you like to pick it up? Do you want insurance?"), reg);
    CHECK(t2.utterance.find("The pickup time is " + goal_call.find("pickup_time")->values[0]) == 0);
    CHECK(t2.utterance.find("add insurance is " + goal_call.find("add_insurance")->values[0]) != std::string::npos);

    auto t3 = next_user_turn(t2.state, goal,
                             std::string_view("What pickup location, start date, end date and car type?"), reg);
    // Only the first two asked slots are answered, even when already known.
    CHECK(t3.utterance.rfind("The pickup location is", 0) == 0);
    CHECK(t3.utterance.find("end date") == std::string::npos);
}

TEST_CASE("confirmation is affirmed only when every mentioned slot is known") {
    const auto& it = item("single_01");
    const auto reg = testsupport::corpus().registry_for(it);
    auto t1 = next_user_turn(initial_state(it.goal), it.goal, std::nullopt, reg);
    auto t2 = next_user_turn(t1.state, it.goal,
                             std::string_view("Please confirm: city is Vancouver. Is that correct?"), reg);
    CHECK(t2.utterance.rfind("Yes", 0) == 0);
    CHECK(t2.state.phase == SimPhase::Expressing);
}

TEST_CASE("stuck after six idle turns") {
    const auto& it = item("single_07");
    const auto reg = testsupport::corpus().registry_for(it);
    auto turn = next_user_turn(initial_state(it.goal), it.goal, std::nullopt, reg);
    std::size_t idle = 0;
    try {
        while (true) {
            turn = next_user_turn(turn.state, it.goal, std::string_view("Hmm, let me think."), reg);
            ++idle;
            REQUIRE(idle < 20);
        }
    } catch (const StuckDialog&) {
    }
    CHECK(idle == kStuckAfter - 1);
    CHECK(turn.state.idle_turns == kStuckAfter - 1);
}

TEST_CASE("any executed call counts as progress") {
    const auto& it = item("single_07");
    const auto reg = testsupport::corpus().registry_for(it);
    auto t1 = next_user_turn(initial_state(it.goal), it.goal, std::nullopt, reg);
    auto t2 = next_user_turn(t1.state, it.goal,
                             std::string_view("APICall(method='GetWeather', parameters={city: Wrong})"), reg);
    CHECK(t2.state.phase == SimPhase::Requesting);
    CHECK(t2.state.idle_turns == 0);
}

TEST_CASE("spoken values keep the raw value") {
    CHECK(speak_value({"rating", Operator::AtLeast, {"4"}}) == "at least 4");
    CHECK(speak_value({"t", Operator::EqualTo, {"15:00"}}) == "15:00 (3 PM)");
    CHECK(speak_value({"t", Operator::EqualTo, {"09:30"}}) == "09:30 (9:30 AM)");
    CHECK(speak_value({"area", Operator::OneOf, {"Central", "Wan Chai"}}) == "one of Central or Wan Chai");
    CHECK(speak_value({"name", Operator::Not, {"Hotel Icon"}}) == "anything but Hotel Icon");
    CHECK(speak_value({"x", Operator::None, {"plain"}}) == "plain");
}

TEST_CASE("slot detection uses phrases, names and aliases") {
    const auto& reg = testsupport::corpus().registry;
    const auto* cars = reg.at("RentalCars").find_intent("ReserveCar");
    REQUIRE(cars);
    CHECK(detect_requested_slots("What time works, and do you want insurance?", *cars, reg) ==
          std::vector<std::string>{"pickup_time", "add_insurance"});
    CHECK(detect_requested_slots("Which car_type and end date?", *cars, reg) ==
          std::vector<std::string>{"car_type", "end_date"});
    CHECK(detect_requested_slots("Timely service!", *cars, reg).empty());
}

TEST_CASE("goal documents") {
    const auto& it = item("multi_01");
    const auto reg = testsupport::corpus().registry_for(it);
    CHECK_NOTHROW(check_goal(it.goal, reg));
    const auto back = goal_from_json(nlohmann::json::parse(goal_to_json(it.goal).dump()));
    REQUIRE(back.goal_calls.size() == it.goal.goal_calls.size());
    for (std::size_t i = 0; i < back.goal_calls.size(); ++i) CHECK(same_call(back.goal_calls[i], it.goal.goal_calls[i]));
    CHECK(back.request_slots == it.goal.request_slots);

    UserGoal bad;
    bad.goal_calls.push_back(call("APICall(method='GetWeather', parameters={})"));
    CHECK_THROWS_AS(check_goal(bad, reg), SchemaViolation);
    UserGoal out_of_range;
    out_of_range.goal_calls.push_back(call("APICall(method='GetWeather', parameters={city: X})"));
    out_of_range.request_slots[3] = {"temperature"};
    CHECK_THROWS_AS(check_goal(out_of_range, reg), SchemaViolation);
    CHECK_THROWS_AS(goal_from_json(nlohmann::json::parse(R"({"goal_calls": ["nope"]})")), SchemaViolation);
    CHECK_THROWS_AS(goal_from_json(nlohmann::json::parse(R"({"calls": []})")), MalformedDocument);
}

TEST_CASE("empty goal starts done") { CHECK(initial_state(UserGoal{}).phase == SimPhase::Done); }

TEST_CASE("llm simulator prompt carries the next call and pending slots") {
    const auto& it = item("single_01");
    const auto reg = testsupport::corpus().registry_for(it);
    auto s = initial_state(it.goal);
    s.pending_requests = {"temperature"};
    const auto p = LlmSimulator::render_prompt(s, it.goal, reg, {});
    CHECK(p.find("Next API Call: " + serialize(it.goal.goal_calls[0])) != std::string::npos);
    CHECK(p.find("Next required slots: temperature") != std::string::npos);
    CHECK(p.find("Last API Call: N/A") != std::string::npos);
}

}
