#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "todkit/error.hpp"
#include "todkit/schema.hpp"

using namespace todkit;

namespace {

DomainSchema parse(const std::string& s) {
    std::istringstream in(s);
    return load_schema(in);
}

const char* kWeather = R"({
  "service_name": "Weather",
  "intents": [{"name": "GetWeather", "is_transactional": false,
               "required_slots": ["city"], "optional_slots": ["date"]}],
  "slots": [{"name": "city", "possible_values": []},
            {"name": "date", "possible_values": []},
            {"name": "temperature", "possible_values": []}]
})";

}  // namespace

TEST_SUITE("schema") {

TEST_CASE("loads and derives is_required_for") {
    const auto s = parse(kWeather);
    CHECK(s.domain_name == "Weather");
    REQUIRE(s.find_slot("city"));
    CHECK(s.find_slot("city")->is_required_for == std::set<std::string>{"GetWeather"});
    CHECK(s.find_slot("date")->is_required_for.empty());
    CHECK(s.find_intent("get_weather") == &s.intents[0]);
    CHECK(s.intents[0].accepts("City") == std::optional<std::string>("city"));
    CHECK_FALSE(s.intents[0].accepts("temperature"));
}

TEST_CASE("json round trip") {
    const auto s = parse(kWeather);
    const auto again = schema_from_json(nlohmann::json::parse(schema_to_json(s).dump()));
    CHECK(again == s);
}

TEST_CASE("violations carry a path") {
    CHECK_THROWS_AS(parse("{not json"), MalformedDocument);
    CHECK_THROWS_AS(parse(R"({"service_name": "X", "intents": [], "slots": []})"), SchemaViolation);

    try {
        parse(R"({"service_name": "X",
          "intents": [{"name": "A", "is_transactional": false, "required_slots": ["ghost"], "optional_slots": []}],
          "slots": []})");
        FAIL("expected violation");
    } catch (const SchemaViolation& e) {
        CHECK(e.path() == "intents[0].required_slots");
    }
    try {
        parse(R"({"service_name": "X",
          "intents": [{"name": "A", "is_transactional": false, "required_slots": ["a"], "optional_slots": ["a"]}],
          "slots": [{"name": "a", "possible_values": []}]})");
        FAIL("expected violation");
    } catch (const SchemaViolation& e) {
        CHECK(e.path() == "intents[0].optional_slots");
    }
    try {
        parse(R"({"service_name": "X",
          "intents": [{"name": "A", "is_transactional": false, "required_slots": [], "optional_slots": []}],
          "slots": [{"name": "a", "possible_values": ["x", "X"]}]})");
        FAIL("expected violation");
    } catch (const SchemaViolation& e) {
        CHECK(e.path() == "slots[0].possible_values");
    }
    CHECK_THROWS_AS(parse(R"({"service_name": "X", "bogus": 1, "intents": [], "slots": []})"), SchemaViolation);
}

TEST_CASE("registry resolution and ambiguity") {
    const auto weather = parse(kWeather);
    auto clone = weather;
    clone.domain_name = "Weather2";
    clone.intents[0].name = "get_weather";

    SchemaRegistry one({weather});
    auto r = resolve_intent(one, "GETWEATHER");
    REQUIRE(r);
    CHECK(r->intent->name == "GetWeather");
    CHECK_FALSE(resolve_intent(one, "GetWeatherNow"));

    SchemaRegistry two({weather, clone});
    CHECK_THROWS_AS(resolve_intent(two, "GetWeather"), AmbiguousIntent);
    CHECK(two.subset({"Weather2"}).domains().size() == 1);
}

TEST_CASE("fixture registry") {
    const auto reg = load_registry_dir(testsupport::corpus_dir() / "schemas");
    CHECK(reg.domains().size() >= 4);
    CHECK(reg.domains().front()->domain_name == "Attractions");
    for (const auto& d : reg.domains()) CHECK_FALSE(d->intents.empty());
}

}
