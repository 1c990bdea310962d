#include "todkit/apicall.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "todkit/error.hpp"
#include "todkit/text.hpp"

namespace todkit {

namespace {

constexpr std::array<std::pair<std::string_view, Operator>, 5> kOperatorTags{{
    {"equal_to", Operator::EqualTo},
    {"at_least", Operator::AtLeast},
    {"at_most", Operator::AtMost},
    {"one_of", Operator::OneOf},
    {"not", Operator::Not},
}};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    std::size_t pos() const { return pos_; }
    void seek(std::size_t p) { pos_ = p; }

    void skip_ws() {
        while (!done() && is_space(s_[pos_])) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    bool eat_word(std::string_view w) {
        skip_ws();
        if (s_.substr(pos_, w.size()) != w) return false;
        pos_ += w.size();
        return true;
    }

    std::optional<std::string> quoted() {
        skip_ws();
        const char q = peek();
        if (q != '\'' && q != '"') return std::nullopt;
        std::string out;
        std::size_t p = pos_ + 1;
        while (p < s_.size()) {
            const char c = s_[p];
            if (c == '\\' && p + 1 < s_.size()) {
                out.push_back(s_[p + 1]);
                p += 2;
                continue;
            }
            if (c == q) {
                pos_ = p + 1;
                return out;
            }
            out.push_back(c);
            ++p;
        }
        return std::nullopt;
    }

    /// Reads up to (not including) any char in `stops`; fails on a forbidden char.
    std::optional<std::string> bare(std::string_view stops, std::string_view forbidden) {
        skip_ws();
        const std::size_t start = pos_;
        std::size_t p = pos_;
        while (p < s_.size() && stops.find(s_[p]) == std::string_view::npos) {
            if (forbidden.find(s_[p]) != std::string_view::npos) return std::nullopt;
            ++p;
        }
        if (p >= s_.size()) return std::nullopt;
        std::string out = text::trim(s_.substr(start, p - start));
        if (out.empty()) return std::nullopt;
        pos_ = p;
        return out;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::optional<std::pair<Operator, std::size_t>> operator_at(std::string_view s) {
    for (const auto& [tag, op] : kOperatorTags) {
        if (s.substr(0, tag.size()) != tag) continue;
        std::size_t p = tag.size();
        while (p < s.size() && is_space(s[p])) ++p;
        if (p < s.size() && s[p] == '(') return std::make_pair(op, p + 1);
    }
    return std::nullopt;
}

/// `op(item|item)` form. The cursor sits at the operator tag.
std::optional<ParamTriple> operator_value(Cursor& cur, std::string_view src) {
    const auto found = operator_at(src.substr(cur.pos()));
    if (!found) return std::nullopt;
    const auto [op, skip] = *found;
    cur.seek(cur.pos() + skip);

    ParamTriple triple;
    triple.op = op;
    const std::string_view stops = op == Operator::OneOf ? "|)" : ")";
    while (true) {
        std::optional<std::string> item = cur.quoted();
        if (!item) item = cur.bare(stops, "");
        if (!item || text::trim(*item).empty()) return std::nullopt;
        triple.values.push_back(text::trim(*item));
        cur.skip_ws();
        if (cur.peek() == '|' && op == Operator::OneOf) {
            cur.seek(cur.pos() + 1);
            continue;
        }
        if (cur.peek() == ')') {
            cur.seek(cur.pos() + 1);
            break;
        }
        return std::nullopt;
    }
    cur.skip_ws();
    if (cur.peek() != ',' && cur.peek() != '}') return std::nullopt;
    return triple;
}

std::optional<ApiCall> parse_call(std::string_view src) {
    Cursor cur(src);
    if (!cur.eat_word(kCallPrefix)) return std::nullopt;
    if (!cur.eat_word("method") || !cur.eat('=')) return std::nullopt;
    auto method = cur.quoted();
    if (!method || text::trim(*method).empty()) return std::nullopt;
    if (!cur.eat(',') || !cur.eat_word("parameters") || !cur.eat('=') || !cur.eat('{'))
        return std::nullopt;

    ApiCall call;
    call.method = text::trim(*method);
    std::set<std::string> keys;
    cur.skip_ws();
    while (cur.peek() != '}') {
        auto key = cur.quoted();
        if (!key) {
            key = cur.bare(":", ",{}'\"");
            // Whitespace around a key may include line breaks; the key itself may not.
            if (key && key->find('\n') != std::string::npos) return std::nullopt;
        }
        if (!key || text::trim(*key).empty() || !cur.eat(':')) return std::nullopt;
        cur.skip_ws();

        std::optional<ParamTriple> triple;
        const std::size_t value_start = cur.pos();
        triple = operator_value(cur, src);
        if (!triple) {
            cur.seek(value_start);
            triple.emplace();
            auto q = cur.quoted();
            if (q) {
                cur.skip_ws();
                if (cur.peek() != ',' && cur.peek() != '}') {
                    q.reset();
                    cur.seek(value_start);
                }
            }
            if (q) {
                triple->values.push_back(text::trim(*q));
            } else if (auto b = cur.bare(",}", "{")) {
                triple->values.push_back(*b);
            } else {
                return std::nullopt;
            }
            if (triple->values.front().empty()) return std::nullopt;
        }
        triple->name = text::trim(*key);
        if (!keys.insert(text::name_key(triple->name)).second) return std::nullopt;
        call.params.push_back(std::move(*triple));

        if (cur.eat(',')) {
            cur.skip_ws();
            continue;
        }
        cur.skip_ws();
        if (cur.peek() != '}') return std::nullopt;
    }
    cur.seek(cur.pos() + 1);
    if (!cur.eat(')')) return std::nullopt;
    call.raw_span = Span{0, cur.pos()};
    return call;
}

bool needs_quotes(std::string_view v, std::string_view specials) {
    if (v.empty() || text::trim(v) != v) return true;
    if (v.find_first_of(specials) != std::string_view::npos) return true;
    return operator_at(v).has_value();
}

std::string quote(std::string_view v) {
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

const char* to_string(Operator op) noexcept {
    switch (op) {
        case Operator::EqualTo: return "equal_to";
        case Operator::AtLeast: return "at_least";
        case Operator::AtMost: return "at_most";
        case Operator::OneOf: return "one_of";
        case Operator::Not: return "not";
        case Operator::None: return "none";
    }
    return "none";
}

std::optional<Operator> parse_operator(std::string_view tag) noexcept {
    if (tag == "none") return Operator::None;
    for (const auto& [name, op] : kOperatorTags)
        if (name == tag) return op;
    return std::nullopt;
}

std::string ParamTriple::value_text() const { return text::join(values, "|"); }

const ParamTriple* ApiCall::find(std::string_view name) const {
    const std::string key = text::name_key(name);
    for (const auto& p : params)
        if (text::name_key(p.name) == key) return &p;
    return nullptr;
}

bool same_call(const ApiCall& a, const ApiCall& b) {
    return a.method == b.method && a.params == b.params;
}

std::optional<ApiCall> parse_call_prefix(std::string_view text) {
    return parse_call(text.substr(0, std::min(text.size(), kMaxCallLength)));
}

std::optional<ApiCall> extract_api_call(std::string_view text) {
    std::size_t pos = text.find(kCallPrefix);
    if (pos == std::string_view::npos) return std::nullopt;
    const std::size_t first = pos;
    while (pos != std::string_view::npos) {
        if (auto call = parse_call_prefix(text.substr(pos))) {
            call->raw_span = Span{pos, pos + call->raw_span.end};
            return call;
        }
        pos = text.find(kCallPrefix, pos + 1);
    }
    throw ParseError("unterminated or malformed API call", first);
}

std::string serialize(const ApiCall& call) {
    std::string out = "APICall(method=";
    if (call.method.find('\'') == std::string::npos)
        out += "'" + call.method + "'";
    else
        out += quote(call.method);
    out += ", parameters={";
    for (std::size_t i = 0; i < call.params.size(); ++i) {
        const auto& p = call.params[i];
        if (i != 0) out += ", ";
        out += needs_quotes(p.name, ":,{}'\"\\\n") ? quote(p.name) : p.name;
        out += ": ";
        if (p.op == Operator::EqualTo || p.op == Operator::None) {
            const std::string v = p.values.empty() ? std::string() : p.values.front();
            out += needs_quotes(v, ",{}'\"\\\n") ? quote(v) : v;
        } else {
            out += to_string(p.op);
            out += "(";
            for (std::size_t k = 0; k < p.values.size(); ++k) {
                if (k != 0) out += "|";
                const auto& v = p.values[k];
                out += needs_quotes(v, "|(),{}'\"\\\n") ? quote(v) : v;
            }
            out += ")";
        }
    }
    out += "})";
    return out;
}

ApiCall canonicalize(ApiCall call) {
    for (auto& p : call.params) {
        if (p.op == Operator::None) p.op = Operator::EqualTo;
        p.name = text::trim(p.name);
        for (auto& v : p.values) v = text::trim(v);
    }
    std::stable_sort(call.params.begin(), call.params.end(),
                     [](const ParamTriple& a, const ParamTriple& b) {
                         return text::name_key(a.name) < text::name_key(b.name);
                     });
    call.method = text::trim(call.method);
    return call;
}

}  // namespace todkit
