#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "todkit/apicall.hpp"
#include "todkit/schema.hpp"
#include "todkit/transcript.hpp"

namespace todkit {

inline constexpr double kDefaultFuzzyThreshold = 0.8;

/// Normalized edit similarity of fuzzy_normalize(a) and fuzzy_normalize(b) >= threshold.
bool fuzzy_match(std::string_view a, std::string_view b, double threshold);

struct CallScore {
    std::optional<std::size_t> matched_gen_index;
    std::size_t gold_index = 0;
    bool method_ok = false;
    std::size_t name_hits = 0, name_total = 0;
    std::size_t value_hits = 0, value_total = 0;
    std::size_t operator_hits = 0, operator_total = 0;
    bool full_ok = false;
};

struct Alignment {
    std::optional<std::size_t> gen_index;
    std::size_t gold_index = 0;
    friend bool operator==(const Alignment&, const Alignment&) = default;
};

/// Order-preserving one-to-one alignment maximizing method-name matches.
/// Among maximal alignments the one with the lexicographically smallest
/// (gold, gen) pair sequence wins. Every gold call appears once.
std::vector<Alignment> align_calls(const std::vector<ApiCall>& generated, const std::vector<ApiCall>& gold);

/// Values and operators are scored only on name-matched parameters.
CallScore score_call(const ApiCall* gen, const ApiCall& gold, double threshold = kDefaultFuzzyThreshold);

struct GoldRequest {
    std::string slot;
    std::string value;
    std::size_t turn_index = 0;
};

/// Value normalization used for inform matching: lowercase, currency symbols
/// and thousands separators removed, trailing ".0..." dropped.
std::string inform_normalize(std::string_view s);

/// Surface forms accepted for a gold value ("15:00" also matches "3:00 pm" and "3 pm").
std::vector<std::string> inform_patterns(std::string_view value);

/// (informed, requested): a request is informed when its value appears in any
/// system turn after its request turn.
std::pair<std::size_t, std::size_t> inform_accuracy(const DialogTranscript& transcript,
                                                    const std::vector<GoldRequest>& gold_requests);

/// Re-anchors gold request turns onto `transcript`: the first user question
/// (a turn containing '?') mentioning the slot, searched in order; the gold
/// index is kept when none is found.
std::vector<GoldRequest> locate_requests(const DialogTranscript& transcript, const std::vector<GoldRequest>& gold,
                                         const SchemaRegistry& registry);

/// Case-folded, punctuation as standalone tokens, split on whitespace.
std::vector<std::string> tokenize(std::string_view text);

struct Diversity {
    double se_bits = 0;
    double ce_bits = 0;
};

/// Unigram Shannon entropy and bigram conditional entropy of a token stream.
Diversity entropy(const std::vector<std::string>& tokens);

/// Over the concatenated system turns. Throws EmptySystemText when there are none.
Diversity diversity(const DialogTranscript& transcript);

enum class DomainClass { Single, Multi };
const char* to_string(DomainClass c) noexcept;

struct DialogScore {
    std::string dialog_id;
    std::vector<CallScore> call_scores;
    bool success = false;
    std::size_t informed = 0, requested = 0;
    std::optional<Diversity> diversity;
    DomainClass domain_class = DomainClass::Single;
    /// Gold calls carry a non-equal_to operator somewhere.
    bool has_operators = false;
    std::size_t hallucinated_calls = 0;
};

struct DialogGold {
    std::vector<ApiCall> calls;
    std::vector<GoldRequest> requests;
    DomainClass domain_class = DomainClass::Single;
};

DialogScore score_dialog(const DialogTranscript& transcript, const DialogGold& gold, const SchemaRegistry& registry,
                         double threshold = kDefaultFuzzyThreshold);

/// Raw counts; merging is associative and commutative.
struct MetricCounts {
    std::size_t calls = 0, method_hits = 0, full_hits = 0;
    std::size_t name_hits = 0, name_total = 0;
    std::size_t value_hits = 0, value_total = 0;
    std::size_t operator_hits = 0, operator_total = 0;
    std::size_t dialogs = 0, successes = 0;
    std::size_t informed = 0, requested = 0;
    std::size_t diversity_dialogs = 0;
    double se_sum = 0, ce_sum = 0;
    std::size_t hallucinated_calls = 0;

    void add(const DialogScore& d);
    MetricCounts& operator+=(const MetricCounts& o);

    static std::optional<double> ratio(std::size_t num, std::size_t den);
    std::optional<double> method_accuracy() const { return ratio(method_hits, calls); }
    std::optional<double> name_accuracy() const { return ratio(name_hits, name_total); }
    std::optional<double> value_accuracy() const { return ratio(value_hits, value_total); }
    std::optional<double> operator_accuracy() const { return ratio(operator_hits, operator_total); }
    std::optional<double> full_accuracy() const { return ratio(full_hits, calls); }
    std::optional<double> success_rate() const { return ratio(successes, dialogs); }
    std::optional<double> inform_rate() const { return ratio(informed, requested); }
    std::optional<double> mean_se() const;
    std::optional<double> mean_ce() const;
};

struct EvalReport {
    MetricCounts single, multi;
    /// Recomputed from single + multi raw counts.
    MetricCounts both() const;
    /// gold call count -> (dialogs, successes)
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> success_by_calls;
    double fuzzy_threshold = kDefaultFuzzyThreshold;
    std::vector<DialogScore> dialogs;

    nlohmann::ordered_json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
    /// Plain-text table: Method / Param Names / Param Values / Operator / Full,
    /// each for Single / Multi / Both, followed by success, inform and diversity.
    std::string table() const;
    std::string histogram_csv() const;
};

EvalReport aggregate(const std::vector<DialogScore>& scores, double threshold = kDefaultFuzzyThreshold);

}  // namespace todkit
