#include "todkit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <sstream>

#include "todkit/error.hpp"
#include "todkit/text.hpp"

namespace todkit {

bool fuzzy_match(std::string_view a, std::string_view b, double threshold) {
    return text::similarity(text::fuzzy_normalize(a), text::fuzzy_normalize(b)) >= threshold;
}

std::vector<Alignment> align_calls(const std::vector<ApiCall>& generated, const std::vector<ApiCall>& gold) {
    const std::size_t n = generated.size();
    const std::size_t m = gold.size();
    std::vector<std::string> gen_keys(n), gold_keys(m);
    for (std::size_t i = 0; i < n; ++i) gen_keys[i] = text::name_key(generated[i].method);
    for (std::size_t j = 0; j < m; ++j) gold_keys[j] = text::name_key(gold[j].method);

    // suffix[i][j] = LCS of generated[i..] and gold[j..]
    std::vector<std::vector<std::size_t>> suffix(n + 1, std::vector<std::size_t>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = m; j-- > 0;)
            suffix[i][j] = gen_keys[i] == gold_keys[j] ? 1 + suffix[i + 1][j + 1]
                                                       : std::max(suffix[i + 1][j], suffix[i][j + 1]);

    std::vector<Alignment> out;
    std::size_t needed = suffix[0][0];
    std::size_t next_gen = 0;
    for (std::size_t j = 0; j < m; ++j) {
        Alignment a{std::nullopt, j};
        if (needed > 0) {
            for (std::size_t i = next_gen; i < n; ++i) {
                if (gen_keys[i] == gold_keys[j] && 1 + suffix[i + 1][j + 1] == needed) {
                    a.gen_index = i;
                    next_gen = i + 1;
                    --needed;
                    break;
                }
            }
        }
        out.push_back(a);
    }
    return out;
}

namespace {

std::string value_key(const ParamTriple& p) {
    std::vector<std::string> v = p.values;
    if (p.op == Operator::OneOf) std::sort(v.begin(), v.end());
    return text::join(v, " ");
}

Operator effective(Operator op) { return op == Operator::None ? Operator::EqualTo : op; }

}  // namespace

CallScore score_call(const ApiCall* gen, const ApiCall& gold, double threshold) {
    CallScore s;
    s.name_total = gold.params.size();
    if (!gen) return s;
    s.method_ok = text::name_key(gen->method) == text::name_key(gold.method);

    // One-to-one parameter matching: exact name keys first, then best fuzzy.
    std::vector<std::optional<std::size_t>> match(gold.params.size());
    std::vector<bool> used(gen->params.size(), false);
    for (std::size_t g = 0; g < gold.params.size(); ++g) {
        for (std::size_t k = 0; k < gen->params.size(); ++k) {
            if (!used[k] && text::name_key(gen->params[k].name) == text::name_key(gold.params[g].name)) {
                match[g] = k;
                used[k] = true;
                break;
            }
        }
    }
    for (std::size_t g = 0; g < gold.params.size(); ++g) {
        if (match[g]) continue;
        double best = -1;
        for (std::size_t k = 0; k < gen->params.size(); ++k) {
            if (used[k]) continue;
            const double sim = text::similarity(text::fuzzy_normalize(gen->params[k].name),
                                                text::fuzzy_normalize(gold.params[g].name));
            if (sim >= threshold && sim > best) {
                best = sim;
                match[g] = k;
            }
        }
        if (match[g]) used[*match[g]] = true;
    }

    for (std::size_t g = 0; g < gold.params.size(); ++g) {
        if (!match[g]) continue;
        const ParamTriple& want = gold.params[g];
        const ParamTriple& have = gen->params[*match[g]];
        ++s.name_hits;
        ++s.value_total;
        ++s.operator_total;
        if (fuzzy_match(value_key(have), value_key(want), threshold)) ++s.value_hits;
        if (fuzzy_match(to_string(effective(have.op)), to_string(effective(want.op)), threshold)) ++s.operator_hits;
    }
    s.full_ok = s.method_ok && s.name_hits == s.name_total && s.value_hits == s.value_total &&
                s.operator_hits == s.operator_total;
    return s;
}

std::string inform_normalize(std::string_view s) {
    std::string out = text::to_lower(s);
    std::string cleaned;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const char c = out[i];
        if (c == '$') continue;
        // UTF-8 euro, pound, yen
        if (out.compare(i, 3, "\xE2\x82\xAC") == 0) { i += 2; continue; }
        if (out.compare(i, 2, "\xC2\xA3") == 0 || out.compare(i, 2, "\xC2\xA5") == 0) { i += 1; continue; }
        cleaned.push_back(c);
    }
    static const std::regex thousands(R"((\d),(\d{3})(?!\d))");
    static const std::regex trailing_zero(R"((\d)\.0+(?!\d))");
    std::string prev;
    do {
        prev = cleaned;
        cleaned = std::regex_replace(cleaned, thousands, "$1$2");
    } while (cleaned != prev);
    return std::regex_replace(cleaned, trailing_zero, "$1");
}

std::vector<std::string> inform_patterns(std::string_view value) {
    const std::string v = text::trim(value);
    std::vector<std::string> out{inform_normalize(v)};
    static const std::regex clock(R"(^([01]?\d|2[0-3]):([0-5]\d)$)");
    std::smatch m;
    if (std::regex_match(v, m, clock)) {
        int hour = std::stoi(m[1].str());
        const std::string minutes = m[2].str();
        const std::string suffix = hour >= 12 ? "pm" : "am";
        hour %= 12;
        if (hour == 0) hour = 12;
        out.push_back(std::to_string(hour) + ":" + minutes + " " + suffix);
        if (minutes == "00") out.push_back(std::to_string(hour) + " " + suffix);
    }
    return out;
}

namespace {

std::string regex_escape(const std::string& s) {
    static const std::string special = R"(\^$.|?*+()[]{})";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

bool mentions_value(const std::string& normalized_text, const std::vector<std::string>& patterns) {
    for (const auto& p : patterns) {
        if (p.empty()) continue;
        const std::regex re("(^|[^a-z0-9])" + regex_escape(p) + "($|[^a-z0-9])");
        if (std::regex_search(normalized_text, re)) return true;
    }
    return false;
}

}  // namespace

std::pair<std::size_t, std::size_t> inform_accuracy(const DialogTranscript& transcript,
                                                    const std::vector<GoldRequest>& gold_requests) {
    std::size_t informed = 0;
    for (const auto& req : gold_requests) {
        const auto patterns = inform_patterns(req.value);
        for (std::size_t i = req.turn_index + 1; i < transcript.turns.size(); ++i) {
            const Turn& t = transcript.turns[i];
            if (t.role != Role::System) continue;
            if (mentions_value(inform_normalize(t.text), patterns)) {
                ++informed;
                break;
            }
        }
    }
    return {informed, gold_requests.size()};
}

std::vector<GoldRequest> locate_requests(const DialogTranscript& transcript, const std::vector<GoldRequest>& gold,
                                         const SchemaRegistry& registry) {
    std::vector<GoldRequest> out;
    std::size_t cursor = 0;
    for (const auto& req : gold) {
        std::vector<std::string> terms{text::name_phrase(req.slot), text::to_lower(req.slot)};
        for (const auto& d : registry.domains())
            if (const SlotDef* def = d->find_slot(req.slot))
                for (const auto& a : def->aliases) terms.push_back(text::to_lower(a));
        GoldRequest located = req;
        for (std::size_t i = cursor; i < transcript.turns.size(); ++i) {
            const Turn& t = transcript.turns[i];
            if (t.role != Role::User || t.text.find('?') == std::string::npos) continue;
            const bool hit = std::any_of(terms.begin(), terms.end(),
                                         [&](const std::string& term) { return text::contains_word(t.text, term); });
            if (hit) {
                located.turn_index = i;
                cursor = i + 1;
                break;
            }
        }
        out.push_back(located);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view input) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    for (char c : input) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isspace(u)) {
            flush();
        } else if (u < 0x80 && std::ispunct(u)) {
            flush();
            tokens.emplace_back(1, c);
        } else {
            current.push_back(static_cast<char>(std::tolower(u)));
        }
    }
    flush();
    return tokens;
}

Diversity entropy(const std::vector<std::string>& tokens) {
    Diversity d;
    if (tokens.empty()) return d;
    std::map<std::string, std::size_t> unigram;
    for (const auto& t : tokens) ++unigram[t];
    const double n = static_cast<double>(tokens.size());
    for (const auto& [w, c] : unigram) {
        const double p = static_cast<double>(c) / n;
        d.se_bits -= p * std::log2(p);
    }
    if (tokens.size() < 2) return d;
    std::map<std::pair<std::string, std::string>, std::size_t> bigram;
    std::map<std::string, std::size_t> first;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        ++bigram[{tokens[i], tokens[i + 1]}];
        ++first[tokens[i]];
    }
    const double nb = static_cast<double>(tokens.size() - 1);
    for (const auto& [pair, c] : bigram) {
        const double joint = static_cast<double>(c) / nb;
        const double conditional = static_cast<double>(c) / static_cast<double>(first[pair.first]);
        d.ce_bits -= joint * std::log2(conditional);
    }
    // Degenerate distributions sum to -0.0; report a clean zero.
    d.se_bits = std::max(0.0, d.se_bits);
    d.ce_bits = std::max(0.0, d.ce_bits);
    return d;
}

Diversity diversity(const DialogTranscript& transcript) {
    const auto texts = transcript.system_texts();
    if (texts.empty()) throw EmptySystemText("dialog " + transcript.dialog_id + " has no system turns");
    return entropy(tokenize(text::join(texts, " ")));
}

const char* to_string(DomainClass c) noexcept { return c == DomainClass::Single ? "single" : "multi"; }

DialogScore score_dialog(const DialogTranscript& transcript, const DialogGold& gold, const SchemaRegistry& registry,
                         double threshold) {
    DialogScore d;
    d.dialog_id = transcript.dialog_id;
    d.domain_class = gold.domain_class;

    std::vector<ApiCall> generated;
    for (const auto& c : transcript.calls()) generated.push_back(canonicalize(c));
    std::vector<ApiCall> gold_calls;
    for (const auto& c : gold.calls) gold_calls.push_back(canonicalize(c));

    std::size_t aligned = 0;
    d.success = true;
    for (const auto& a : align_calls(generated, gold_calls)) {
        CallScore s = score_call(a.gen_index ? &generated[*a.gen_index] : nullptr, gold_calls[a.gold_index], threshold);
        s.gold_index = a.gold_index;
        s.matched_gen_index = a.gen_index;
        aligned += a.gen_index ? 1 : 0;
        d.success = d.success && s.full_ok;
        d.call_scores.push_back(s);
    }
    d.hallucinated_calls = generated.size() - aligned;
    for (const auto& c : gold_calls)
        for (const auto& p : c.params)
            if (effective(p.op) != Operator::EqualTo) d.has_operators = true;

    const auto located = locate_requests(transcript, gold.requests, registry);
    std::tie(d.informed, d.requested) = inform_accuracy(transcript, located);
    try {
        d.diversity = diversity(transcript);
    } catch (const EmptySystemText&) {
    }
    return d;
}

void MetricCounts::add(const DialogScore& d) {
    ++dialogs;
    successes += d.success ? 1 : 0;
    informed += d.informed;
    requested += d.requested;
    hallucinated_calls += d.hallucinated_calls;
    if (d.diversity) {
        ++diversity_dialogs;
        se_sum += d.diversity->se_bits;
        ce_sum += d.diversity->ce_bits;
    }
    for (const auto& c : d.call_scores) {
        ++calls;
        method_hits += c.method_ok ? 1 : 0;
        full_hits += c.full_ok ? 1 : 0;
        name_hits += c.name_hits;
        name_total += c.name_total;
        value_hits += c.value_hits;
        value_total += c.value_total;
        if (d.has_operators) {
            operator_hits += c.operator_hits;
            operator_total += c.operator_total;
        }
    }
}

MetricCounts& MetricCounts::operator+=(const MetricCounts& o) {
    calls += o.calls;
    method_hits += o.method_hits;
    full_hits += o.full_hits;
    name_hits += o.name_hits;
    name_total += o.name_total;
    value_hits += o.value_hits;
    value_total += o.value_total;
    operator_hits += o.operator_hits;
    operator_total += o.operator_total;
    dialogs += o.dialogs;
    successes += o.successes;
    informed += o.informed;
    requested += o.requested;
    diversity_dialogs += o.diversity_dialogs;
    se_sum += o.se_sum;
    ce_sum += o.ce_sum;
    hallucinated_calls += o.hallucinated_calls;
    return *this;
}

std::optional<double> MetricCounts::ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> MetricCounts::mean_se() const {
    if (diversity_dialogs == 0) return std::nullopt;
    return se_sum / static_cast<double>(diversity_dialogs);
}

std::optional<double> MetricCounts::mean_ce() const {
    if (diversity_dialogs == 0) return std::nullopt;
    return ce_sum / static_cast<double>(diversity_dialogs);
}

MetricCounts EvalReport::both() const {
    MetricCounts b = single;
    b += multi;
    return b;
}

EvalReport aggregate(const std::vector<DialogScore>& scores, double threshold) {
    EvalReport r;
    r.fuzzy_threshold = threshold;
    for (const auto& d : scores) {
        (d.domain_class == DomainClass::Single ? r.single : r.multi).add(d);
        auto& bucket = r.success_by_calls[d.call_scores.size()];
        ++bucket.first;
        bucket.second += d.success ? 1 : 0;
    }
    r.dialogs = scores;
    return r;
}

namespace {

nlohmann::ordered_json counts_json(const MetricCounts& c) {
    nlohmann::ordered_json j;
    auto opt = [](std::optional<double> v) -> nlohmann::ordered_json {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["method_accuracy"] = opt(c.method_accuracy());
    j["param_name_accuracy"] = opt(c.name_accuracy());
    j["param_value_accuracy"] = opt(c.value_accuracy());
    j["operator_accuracy"] = opt(c.operator_accuracy());
    j["full_api_accuracy"] = opt(c.full_accuracy());
    j["dialog_success_rate"] = opt(c.success_rate());
    j["inform_accuracy"] = opt(c.inform_rate());
    j["mean_se"] = opt(c.mean_se());
    j["mean_ce"] = opt(c.mean_ce());
    j["counts"] = {{"calls", c.calls},
                   {"method_hits", c.method_hits},
                   {"full_hits", c.full_hits},
                   {"name_hits", c.name_hits},
                   {"name_total", c.name_total},
                   {"value_hits", c.value_hits},
                   {"value_total", c.value_total},
                   {"operator_hits", c.operator_hits},
                   {"operator_total", c.operator_total},
                   {"dialogs", c.dialogs},
                   {"successes", c.successes},
                   {"informed", c.informed},
                   {"requested", c.requested},
                   {"diversity_dialogs", c.diversity_dialogs},
                   {"se_sum", c.se_sum},
                   {"ce_sum", c.ce_sum},
                   {"hallucinated_calls", c.hallucinated_calls}};
    return j;
}

MetricCounts counts_from_json(const nlohmann::json& j) {
    const auto& c = j.at("counts");
    MetricCounts m;
    m.calls = c.at("calls");
    m.method_hits = c.at("method_hits");
    m.full_hits = c.at("full_hits");
    m.name_hits = c.at("name_hits");
    m.name_total = c.at("name_total");
    m.value_hits = c.at("value_hits");
    m.value_total = c.at("value_total");
    m.operator_hits = c.at("operator_hits");
    m.operator_total = c.at("operator_total");
    m.dialogs = c.at("dialogs");
    m.successes = c.at("successes");
    m.informed = c.at("informed");
    m.requested = c.at("requested");
    m.diversity_dialogs = c.at("diversity_dialogs");
    m.se_sum = c.at("se_sum");
    m.ce_sum = c.at("ce_sum");
    m.hallucinated_calls = c.at("hallucinated_calls");
    return m;
}

std::string pct(std::optional<double> v) {
    if (!v) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
    return buf;
}

std::string num(std::optional<double> v) {
    if (!v) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return buf;
}

}  // namespace

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["metadata"] = {{"fuzzy_threshold", fuzzy_threshold},
                     {"averaging", "micro"},
                     {"alignment", "lcs-method-name"},
                     {"param_name_semantics", "gold-recall"},
                     {"diversity", "macro-per-dialog"}};
    j["single"] = counts_json(single);
    j["multi"] = counts_json(multi);
    j["both"] = counts_json(both());
    nlohmann::ordered_json hist = nlohmann::ordered_json::array();
    for (const auto& [n, ds] : success_by_calls)
        hist.push_back({{"num_calls", n}, {"dialogs", ds.first}, {"successes", ds.second}});
    j["success_by_calls"] = hist;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& d : dialogs) {
        nlohmann::ordered_json dj;
        dj["dialog_id"] = d.dialog_id;
        dj["domain_class"] = to_string(d.domain_class);
        dj["success"] = d.success;
        dj["calls"] = d.call_scores.size();
        std::size_t full = 0;
        for (const auto& c : d.call_scores) full += c.full_ok ? 1 : 0;
        dj["full_calls"] = full;
        dj["informed"] = d.informed;
        dj["requested"] = d.requested;
        dj["se"] = d.diversity ? nlohmann::ordered_json(d.diversity->se_bits) : nlohmann::ordered_json(nullptr);
        dj["ce"] = d.diversity ? nlohmann::ordered_json(d.diversity->ce_bits) : nlohmann::ordered_json(nullptr);
        dj["hallucinated_calls"] = d.hallucinated_calls;
        per.push_back(std::move(dj));
    }
    j["dialogs"] = per;
    return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport r;
    try {
        r.fuzzy_threshold = j.at("metadata").at("fuzzy_threshold");
        r.single = counts_from_json(j.at("single"));
        r.multi = counts_from_json(j.at("multi"));
        for (const auto& h : j.at("success_by_calls"))
            r.success_by_calls[h.at("num_calls")] = {h.at("dialogs"), h.at("successes")};
    } catch (const nlohmann::json::exception& e) {
        throw MalformedDocument(std::string("report: ") + e.what());
    }
    return r;
}

std::string EvalReport::table() const {
    const MetricCounts b = both();
    const MetricCounts* cols[] = {&single, &multi, &b};
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %10s %10s %10s\n", "Metric (%)", "Single", "Multi", "Both");
    out << line;
    out << std::string(55, '-') << "\n";
    auto row = [&](const char* name, auto getter, bool as_pct) {
        std::string v[3];
        for (int i = 0; i < 3; ++i) v[i] = as_pct ? pct((cols[i]->*getter)()) : num((cols[i]->*getter)());
        std::snprintf(line, sizeof line, "%-22s %10s %10s %10s\n", name, v[0].c_str(), v[1].c_str(), v[2].c_str());
        out << line;
    };
    row("Method", &MetricCounts::method_accuracy, true);
    row("Param Names", &MetricCounts::name_accuracy, true);
    row("Param Values", &MetricCounts::value_accuracy, true);
    row("Operator", &MetricCounts::operator_accuracy, true);
    row("Full API", &MetricCounts::full_accuracy, true);
    row("Dialog Success Rate", &MetricCounts::success_rate, true);
    row("Inform Accuracy", &MetricCounts::inform_rate, true);
    row("SE (bits)", &MetricCounts::mean_se, false);
    row("CE (bits)", &MetricCounts::mean_ce, false);
    out << std::string(55, '-') << "\n";
    std::snprintf(line, sizeof line, "dialogs=%zu calls=%zu hallucinated_calls=%zu fuzzy_threshold=%.2f\n", b.dialogs,
                  b.calls, b.hallucinated_calls, fuzzy_threshold);
    out << line;
    return out.str();
}

std::string EvalReport::histogram_csv() const {
    std::ostringstream out;
    out << "num_calls,dialogs,successes,success_rate\n";
    for (const auto& [n, ds] : success_by_calls) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.6f\n", n, ds.first, ds.second,
                      ds.first ? static_cast<double>(ds.second) / static_cast<double>(ds.first) : 0.0);
        out << buf;
    }
    return out.str();
}

}  // namespace todkit
