#include <doctest.h>

#include "convert.hpp"
#include "grammar.hpp"
#include "todkit/apicall.hpp"
#include "todkit/error.hpp"

using namespace todkit;

TEST_SUITE("apicall") {

TEST_CASE("reference examples parse") {
    auto c = extract_api_call("APICall(method='GetWeather', parameters={ city: Vancouver, date: 2024-03-02 })");
    REQUIRE(c);
    CHECK(c->method == "GetWeather");
    REQUIRE(c->params.size() == 2);
    CHECK(c->params[0] == ParamTriple{"city", Operator::None, {"Vancouver"}});
    CHECK(c->params[1] == ParamTriple{"date", Operator::None, {"2024-03-02"}});

    auto r = extract_api_call(
        "APICall(method='ReserveCar', parameters={ pickup_location: Indira Gandhi International Airport, car_type: "
        "Hatchback, start_date: 2019-03-02, end_date: 2019-03-03, pickup_time: 15:00, add_insurance: True })");
    REQUIRE(r);
    CHECK(r->params.size() == 6);
    CHECK(r->find("pickup_time")->values[0] == "15:00");
    CHECK(r->find("add_insurance")->values[0] == "True");

    CHECK_FALSE(extract_api_call("Sure! What time would you like to depart?"));
}

TEST_CASE("operators") {
    auto c = extract_api_call(
        "APICall(method='SearchHotel', parameters={rating: at_least(4), price: at_most( 300 ), "
        "area: one_of(Central|Wan Chai), name: not(Hotel Icon), city: equal_to(Hong Kong)})");
    REQUIRE(c);
    CHECK(c->find("rating")->op == Operator::AtLeast);
    CHECK(c->find("rating")->values == std::vector<std::string>{"4"});
    CHECK(c->find("price")->values == std::vector<std::string>{"300"});
    CHECK(c->find("area")->op == Operator::OneOf);
    CHECK(c->find("area")->values == std::vector<std::string>{"Central", "Wan Chai"});
    CHECK(c->find("name")->op == Operator::Not);
    CHECK(c->find("city")->op == Operator::EqualTo);
}

TEST_CASE("first call wins and span is exact") {
    const std::string text = "Okay. APICall(method='A', parameters={x: 1}) then APICall(method='B', parameters={})";
    auto c = extract_api_call(text);
    REQUIRE(c);
    CHECK(c->method == "A");
    CHECK(text.substr(c->raw_span.start, c->raw_span.end - c->raw_span.start) ==
          "APICall(method='A', parameters={x: 1})");
}

TEST_CASE("malformed call raises ParseError") {
    CHECK_THROWS_AS(extract_api_call("APICall(method='GetWeather', parameters={city: Van"), ParseError);
    CHECK_THROWS_AS(extract_api_call("x APICall(garbage"), ParseError);
    // A broken call followed by a good one: the good one is returned.
    auto c = extract_api_call("APICall(oops APICall(method='A', parameters={})");
    REQUIRE(c);
    CHECK(c->method == "A");
    // Duplicate names after normalization are not well-formed.
    CHECK_THROWS_AS(extract_api_call("APICall(method='A', parameters={a: 1, A: 2})"), ParseError);
}

TEST_CASE("serialize and canonicalize") {
    ApiCall c{"GetWeather", {{"city", Operator::EqualTo, {"Vancouver"}}}, {}, 0};
    CHECK(serialize(c) == "APICall(method='GetWeather', parameters={city: Vancouver})");
    CHECK(serialize(ApiCall{"X", {}, {}, 0}) == "APICall(method='X', parameters={})");
    ApiCall r{"H", {{"rating", Operator::AtLeast, {"4"}}}, {}, 0};
    CHECK(serialize(r) == "APICall(method='H', parameters={rating: at_least(4)})");

    ApiCall unsorted{"M", {{"b", Operator::None, {" 2 "}}, {"a", Operator::None, {"1"}}}, {}, 0};
    const ApiCall canon = canonicalize(unsorted);
    CHECK(canon.params[0].name == "a");
    CHECK(canon.params[1].values[0] == "2");
    CHECK(canon.params[0].op == Operator::EqualTo);
    CHECK(same_call(canonicalize(canon), canon));
}

TEST_CASE("values needing quotes survive serialization") {
    ApiCall c{"M",
              {{"a", Operator::EqualTo, {"x, y"}},
               {"b", Operator::OneOf, {"p|q", "r)"}},
               {"c", Operator::EqualTo, {"at_least(3)"}},
               {"d", Operator::EqualTo, {"it's \"quoted\""}}},
              {},
              0};
    auto back = parse_call_prefix(serialize(c));
    REQUIRE(back);
    CHECK(same_call(canonicalize(*back), canonicalize(c)));
}

TEST_CASE("library agrees with the reference parser on generated calls") {
    grammar::Gen gen(1234);
    for (int i = 0; i < 1000; ++i) {
        auto [text, expected] = gen.call();
        INFO(text);
        auto ref = grammar::parse(text);
        REQUIRE(ref);
        REQUIRE(*ref == expected);
        auto lib = extract_api_call(text);
        REQUIRE(lib);
        CHECK(grammar::from_lib(*lib) == expected);

        const ApiCall canon = canonicalize(*lib);
        auto again = extract_api_call(serialize(canon));
        REQUIRE(again);
        CHECK(same_call(canonicalize(*again), canon));
        CHECK(same_call(canonicalize(canon), canon));

        const std::string wrapped = "Sure thing. " + text + " Anything else?";
        auto inner = extract_api_call(wrapped);
        REQUIRE(inner);
        auto span = wrapped.substr(inner->raw_span.start, inner->raw_span.end - inner->raw_span.start);
        CHECK(span == text);
        auto reparsed = extract_api_call(span);
        REQUIRE(reparsed);
        CHECK(same_call(*reparsed, *lib));
    }
}

TEST_CASE("fuzz: no crash, only ParseError") {
    grammar::Gen gen(99);
    std::vector<std::string> seeds;
    for (int i = 0; i < 50; ++i) seeds.push_back(gen.call().first);
    std::size_t found = 0, parse_errors = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::string s = gen.noise(seeds);
        try {
            auto c = extract_api_call(s);
            if (c) {
                ++found;
                CHECK(c->raw_span.end <= s.size());
                auto again = extract_api_call(s.substr(c->raw_span.start, c->raw_span.end - c->raw_span.start));
                REQUIRE(again);
                CHECK(same_call(*again, *c));
            }
        } catch (const ParseError&) {
            ++parse_errors;
        }
    }
    CHECK(found > 0);
    CHECK(parse_errors > 0);
}

}
