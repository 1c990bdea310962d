#pragma once

// Reference parser and generators for the call surface grammar, written
// against the grammar description only.

#include <algorithm>
#include <cctype>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace grammar {

struct Entry {
    std::string key;
    std::string op;  // "" for the plain form
    std::vector<std::string> values;
    bool operator==(const Entry&) const = default;
};

struct Call {
    std::string method;
    std::vector<Entry> entries;
    bool operator==(const Call&) const = default;
};

class Ref {
public:
    explicit Ref(const std::string& s) : s_(s) {}

    std::optional<Call> call() {
        if (!lit("APICall(")) return std::nullopt;
        ws();
        if (!lit("method")) return std::nullopt;
        ws();
        if (!lit("=")) return std::nullopt;
        ws();
        auto m = quoted();
        if (!m) return std::nullopt;
        Call c;
        c.method = trim(*m);
        if (c.method.empty()) return std::nullopt;
        ws();
        if (!lit(",")) return std::nullopt;
        ws();
        if (!lit("parameters")) return std::nullopt;
        ws();
        if (!lit("=")) return std::nullopt;
        ws();
        if (!lit("{")) return std::nullopt;
        ws();
        if (!lit("}")) {
            while (true) {
                auto e = entry();
                if (!e) return std::nullopt;
                c.entries.push_back(*e);
                ws();
                if (lit(",")) {
                    ws();
                    continue;
                }
                if (lit("}")) break;
                return std::nullopt;
            }
        }
        ws();
        if (!lit(")")) return std::nullopt;
        return c;
    }

private:
    static std::string trim(const std::string& v) {
        const auto b = v.find_first_not_of(" \t\n\r");
        if (b == std::string::npos) return "";
        return v.substr(b, v.find_last_not_of(" \t\n\r") - b + 1);
    }
    bool at_end() const { return i_ >= s_.size(); }
    void ws() {
        while (!at_end() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) ++i_;
    }
    bool lit(const std::string& w) {
        if (s_.compare(i_, w.size(), w) != 0) return false;
        i_ += w.size();
        return true;
    }
    std::optional<std::string> quoted() {
        if (at_end() || (s_[i_] != '\'' && s_[i_] != '"')) return std::nullopt;
        const char q = s_[i_];
        std::string out;
        for (std::size_t j = i_ + 1; j < s_.size(); ++j) {
            if (s_[j] == '\\' && j + 1 < s_.size()) {
                out += s_[++j];
                continue;
            }
            if (s_[j] == q) {
                i_ = j + 1;
                return out;
            }
            out += s_[j];
        }
        return std::nullopt;
    }
    std::optional<std::string> bare_until(const std::string& stops) {
        const std::size_t j = s_.find_first_of(stops, i_);
        if (j == std::string::npos) return std::nullopt;
        std::string v = trim(s_.substr(i_, j - i_));
        if (v.empty()) return std::nullopt;
        i_ = j;
        return v;
    }
    std::optional<Entry> entry() {
        Entry e;
        auto k = quoted();
        if (!k) k = bare_until(":");
        if (!k || trim(*k).empty()) return std::nullopt;
        e.key = trim(*k);
        ws();
        if (!lit(":")) return std::nullopt;
        ws();
        for (const char* tag : {"equal_to", "at_least", "at_most", "one_of", "not"}) {
            const std::size_t save = i_;
            if (!lit(tag)) continue;
            ws();
            if (!lit("(")) {
                i_ = save;
                continue;
            }
            e.op = tag;
            const std::string stops = e.op == "one_of" ? "|)" : ")";
            while (true) {
                ws();
                auto v = quoted();
                if (!v) v = bare_until(stops);
                if (!v || trim(*v).empty()) return std::nullopt;
                e.values.push_back(trim(*v));
                ws();
                if (e.op == "one_of" && lit("|")) continue;
                if (lit(")")) break;
                return std::nullopt;
            }
            return e;
        }
        auto v = quoted();
        if (!v) v = bare_until(",}");
        if (!v || trim(*v).empty()) return std::nullopt;
        e.values.push_back(trim(*v));
        return e;
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

inline std::optional<Call> parse(const std::string& s) { return Ref(s).call(); }

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    std::string ws() {
        static const char* pads[] = {"", "", " ", "  ", "\t", " \n "};
        return pads[below(6)];
    }

    std::string ident() {
        static const char* parts[] = {"city", "date", "price", "pickup", "time", "star", "rating", "area",
                                      "type", "name", "x", "q9"};
        std::string s = parts[below(12)];
        for (std::size_t n = below(3); n > 0; --n) s += std::string("_") + parts[below(12)];
        return s;
    }

    std::string word() {
        static const char* words[] = {"Vancouver", "San Jose", "2024-03-02", "15:00", "True", "4", "39.0",
                                      "Golf Club Manor", "Café Noir", "a.b-c", "$45", "北京", "x"};
        return words[below(13)];
    }

    /// Value text, whether it must be quoted, and a surface rendering.
    std::string value(const std::string& v, bool inside_op) {
        const bool must_quote = v.find_first_of(inside_op ? "|(),{}'\"" : ",{}'\"") != std::string::npos;
        if (must_quote || coin(0.25)) {
            std::string q = coin() ? "'" : "\"";
            std::string out = q;
            for (char c : v) {
                if (std::string(1, c) == q || c == '\\') out += '\\';
                out += c;
            }
            return out + q;
        }
        return v;
    }

    std::string raw_value() {
        std::string v = word();
        if (coin(0.15)) v += ", with comma";
        if (coin(0.1)) v += " {brace}";
        if (coin(0.1)) v += " it's";
        return v;
    }

    /// A grammar-valid call text and its expected parse.
    std::pair<std::string, Call> call() {
        Call c;
        static const char* methods[] = {"GetWeather", "ReserveCar", "FindRestaurants", "Search_Hotel", "X"};
        c.method = methods[below(5)];
        const std::string q = coin() ? "'" : "\"";
        std::string t = "APICall(" + ws() + "method" + ws() + "=" + ws() + q + c.method + q;
        t += ws() + "," + ws() + "parameters" + ws() + "=" + ws() + "{" + ws();
        std::vector<std::string> used;
        const std::size_t n = below(6);
        for (std::size_t i = 0; i < n; ++i) {
            Entry e;
            do {
                e.key = ident();
            } while (std::find(used.begin(), used.end(), key_of(e.key)) != used.end());
            used.push_back(key_of(e.key));
            if (i) t += ws() + "," + ws();
            t += coin(0.2) ? value(e.key, false) : e.key;
            t += ws() + ":" + ws();
            static const char* ops[] = {"", "", "equal_to", "at_least", "at_most", "one_of", "not"};
            e.op = ops[below(7)];
            if (e.op.empty()) {
                e.values = {raw_value()};
                t += value(e.values[0], false);
            } else {
                const std::size_t k = e.op == "one_of" ? 1 + below(3) : 1;
                t += e.op + ws() + "(";
                for (std::size_t j = 0; j < k; ++j) {
                    e.values.push_back(raw_value());
                    if (j) t += ws() + "|";
                    t += ws() + value(e.values.back(), true) + ws();
                }
                t += ")";
            }
            c.entries.push_back(e);
        }
        t += ws() + "}" + ws() + ")";
        return {t, c};
    }

    /// Arbitrary text, biased towards near-miss call fragments.
    std::string noise(const std::vector<std::string>& seeds) {
        std::string s;
        switch (below(4)) {
            case 0: {
                const std::size_t n = below(200);
                for (std::size_t i = 0; i < n; ++i) s += static_cast<char>(0x20 + below(95));
                break;
            }
            case 1: {
                s = seeds[below(seeds.size())];
                s = s.substr(0, below(s.size() + 1));
                break;
            }
            case 2: {
                s = seeds[below(seeds.size())];
                for (std::size_t k = 1 + below(5); k > 0; --k) {
                    static const char junk[] = "(){}'\"|,:=\\ \n";
                    const std::size_t at = below(s.size() + 1);
                    if (coin()) s.insert(at, 1, junk[below(sizeof(junk) - 1)]);
                    else if (at < s.size()) s.erase(at, 1);
                }
                break;
            }
            default: {
                s = "Sure! " + seeds[below(seeds.size())] + " APICall(method='" + word();
                if (coin()) s += "APICall(";
                break;
            }
        }
        if (coin(0.1)) s += "\xC3\xA9\xE5\x8C\x97";
        return s;
    }

    static std::string key_of(const std::string& k) {
        std::string out;
        for (char c : k)
            if (c != '_' && c != ' ' && c != '-') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace grammar
