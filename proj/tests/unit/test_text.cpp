#include <doctest.h>

#include <functional>
#include <map>
#include <random>

#include "todkit/text.hpp"

using namespace todkit;

namespace {

// Plain recursive definition with memo; no shared code with the library.
std::size_t lev_oracle(const std::string& a, const std::string& b) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size()) return b.size() - j;
        if (j == b.size()) return a.size() - i;
        auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::size_t best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
        best = std::min(best, go(i + 1, j) + 1);
        best = std::min(best, go(i, j + 1) + 1);
        return memo[key] = best;
    };
    return go(0, 0);
}

std::string random_word(std::mt19937_64& rng, std::size_t max_len, const std::string& alphabet) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s(len(rng), ' ');
    for (auto& c : s) c = alphabet[pick(rng)];
    return s;
}

}  // namespace

TEST_SUITE("text") {

TEST_CASE("levenshtein agrees with the recursive definition") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const auto a = random_word(rng, 9, "abcd");
        const auto b = random_word(rng, 9, "abcd");
        CHECK(text::levenshtein(a, b) == lev_oracle(a, b));
        CHECK(text::levenshtein(a, b) == text::levenshtein(b, a));
    }
    CHECK(text::levenshtein("kitten", "sitting") == 3);
    CHECK(text::levenshtein("", "abc") == 3);
}

TEST_CASE("similarity bounds") {
    CHECK(text::similarity("", "") == 1.0);
    CHECK(text::similarity("abc", "abc") == 1.0);
    CHECK(text::similarity("abc", "xyz") == 0.0);
    CHECK(text::similarity("abcd", "abce") == doctest::Approx(0.75));
}

TEST_CASE("name_key and name_phrase") {
    CHECK(text::name_key("GetWeather") == text::name_key("get_weather"));
    CHECK(text::name_key("get weather") == "getweather");
    CHECK(text::name_key("pickup-time") == "pickuptime");
    CHECK(text::name_phrase("pickup_time") == "pickup time");
    CHECK(text::name_phrase("  add_insurance ") == "add insurance");
}

TEST_CASE("fuzzy_normalize strips punctuation and case") {
    CHECK(text::fuzzy_normalize("Golf Club Manor, Apts.") == "golf club manor apts");
    CHECK(text::fuzzy_normalize("  A   b ") == "a b");
    CHECK(text::fuzzy_normalize("510-581-0911") == "5105810911");
}

TEST_CASE("nearest_names orders by distance then candidate order") {
    const std::vector<std::string> cands{"city", "date", "cuisine", "citx"};
    CHECK(text::nearest_names("citty", cands) == std::vector<std::string>{"city", "citx"});
    CHECK(text::nearest_names("zzzzzzzz", cands).empty());
    CHECK(text::nearest_names("dat", cands, 3, 1) == std::vector<std::string>{"date"});
}

TEST_CASE("word search is bounded") {
    CHECK(text::contains_word("The price is $39.", "price"));
    CHECK_FALSE(text::contains_word("The prices", "price"));
    CHECK(text::find_word("What PICKUP time?", "pickup time") == 5);
    CHECK(text::split("a|b||c", '|') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(text::join({"a", "b"}, ", ") == "a, b");
}

}
