// One PASS/FAIL/SKIP line per acceptance criterion; exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "grammar.hpp"
#include "convert.hpp"
#include "oracles.hpp"
#include "recording.hpp"
#include "support.hpp"
#include "todkit/app.hpp"
#include "todkit/error.hpp"
#include "todkit/ingest.hpp"
#include "todkit/orchestrator.hpp"
#include "todkit/validator.hpp"

using namespace todkit;

namespace {

struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

enum class Outcome { Pass, Fail, Skip };

int failed = 0;

void report(int n, const std::string& title, const std::function<Outcome(Check&, std::string&)>& body) {
    Check c;
    std::string note;
    Outcome o;
    try {
        o = body(c, note);
    } catch (const std::exception& e) {
        c.failures.push_back(std::string("exception: ") + e.what());
        o = Outcome::Fail;
    }
    if (!c.failures.empty()) o = Outcome::Fail;
    const char* tag = o == Outcome::Pass ? "PASS" : o == Outcome::Skip ? "SKIP" : "FAIL";
    std::cout << tag << " criterion " << n << ": " << title;
    if (!note.empty()) std::cout << " (" << note << ")";
    std::cout << "\n";
    for (std::size_t i = 0; i < c.failures.size() && i < 10; ++i) std::cout << "    " << c.failures[i] << "\n";
    if (o == Outcome::Fail) ++failed;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

const Corpus& corpus() { return testsupport::corpus(); }

// Rewrites the i-th api_call turn of a copy of the gold transcript.
DialogTranscript with_calls(const DialogTranscript& gold, const std::vector<ApiCall>& calls) {
    DialogTranscript t = gold;
    std::size_t k = 0;
    for (auto& turn : t.turns)
        if (turn.role == Role::ApiCall) {
            turn.call = calls.at(k++);
            turn.text = serialize(*turn.call);
        }
    return t;
}

EvalReport score_all(const std::function<DialogTranscript(const CorpusItem&)>& make) {
    std::vector<DialogScore> scores;
    for (const auto& item : corpus().items)
        scores.push_back(score_dialog(make(item), item.gold(), corpus().registry_for(item)));
    return aggregate(scores);
}

Outcome oracle_identity(Check& c, std::string& note) {
    const auto start = std::chrono::steady_clock::now();
    RunConfig cfg;
    cfg.corpus = testsupport::corpus_dir().string();
    const Corpus fresh = load_corpus(cfg.corpus);
    auto backend = make_backend(cfg, fresh);
    ExemplarCache cache;
    const RunOutcome run = run_corpus(cfg, fresh, *backend, cache);
    const EvalReport r = score_transcripts(run.transcripts, fresh, cfg.fuzzy_threshold);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto b = r.both();
    c.expect(fresh.items.size() == 20, "corpus has " + std::to_string(fresh.items.size()) + " items");
    c.expect(b.full_accuracy() == 1.0, "full api accuracy " + fmt(b.full_accuracy().value_or(-1)));
    c.expect(b.success_rate() == 1.0, "dialog success " + fmt(b.success_rate().value_or(-1)));
    c.expect(b.inform_rate() == 1.0, "inform accuracy " + fmt(b.inform_rate().value_or(-1)));
    std::size_t feedback = 0;
    for (const auto& t : run.transcripts) feedback += t.count(Role::Feedback);
    c.expect(feedback == 0, std::to_string(feedback) + " feedback turns");
    c.expect(run.completed == fresh.items.size(), "completed " + std::to_string(run.completed));
    c.expect(secs < 10.0, "runtime " + fmt(secs) + " s");
    note = std::to_string(b.calls) + " calls, " + fmt(secs) + " s";
    return Outcome::Pass;
}

Outcome error_injection(Check& c, std::string& note) {
    std::size_t total = 0;
    for (const auto& item : corpus().items) total += item.gold_calls().size();
    // Every fifth call in corpus order, when that is exactly a fifth.
    c.expect(total % 5 == 0, "gold call count " + std::to_string(total) + " is not a multiple of 5");

    std::size_t seen = 0, corrupted = 0;
    const EvalReport methods = score_all([&](const CorpusItem& item) {
        auto calls = item.gold_calls();
        for (auto& call : calls)
            if (seen++ % 5 == 0) {
                call.method += "Xq";
                ++corrupted;
            }
        return with_calls(*item.gold_transcript, calls);
    });
    const auto mb = methods.both();
    c.expect(mb.calls == total, "scored " + std::to_string(mb.calls) + " calls");
    c.expect(corrupted * 5 == total, "corrupted " + std::to_string(corrupted));
    c.expect(mb.method_accuracy() == 0.8, "method accuracy " + fmt(mb.method_accuracy().value_or(-1)));

    const EvalReport clean = score_all([](const CorpusItem& item) { return *item.gold_transcript; });
    std::size_t deleted = 0;
    const EvalReport dropped = score_all([&](const CorpusItem& item) {
        auto calls = item.gold_calls();
        for (auto& call : calls)
            if (!call.params.empty()) {
                call.params.erase(call.params.begin());
                ++deleted;
            }
        return with_calls(*item.gold_transcript, calls);
    });
    const auto cb = clean.both(), db = dropped.both();
    const std::size_t names = cb.name_total;
    c.expect(db.name_total == names, "name total changed");
    c.expect(db.name_hits == names - deleted, "name hits " + std::to_string(db.name_hits));
    c.expect(*db.name_accuracy() == static_cast<double>(names - deleted) / static_cast<double>(names),
             "name accuracy " + fmt(*db.name_accuracy()));
    c.expect(db.value_total == cb.value_total - deleted, "value total " + std::to_string(db.value_total) + " vs " +
                                                             std::to_string(cb.value_total) + " - " +
                                                             std::to_string(deleted));
    c.expect(db.value_hits == db.value_total, "surviving values should all match");
    note = std::to_string(total) + " calls, " + std::to_string(deleted) + " deletions";
    return Outcome::Pass;
}

struct Injection {
    const char* dialog;
    ErrorKind kind;
};

ApiCall inject(const ApiCall& gold, ErrorKind kind, const SchemaRegistry& reg) {
    ApiCall bad = gold;
    const auto intent = resolve_intent(reg, gold.method);
    switch (kind) {
        case ErrorKind::UnknownMethod: bad.method += "Report"; break;
        case ErrorKind::UnknownSlot:
            // Prefer an optional slot so the error stays a single kind.
            for (auto& p : bad.params)
                if (!intent->intent->is_required(p.name)) {
                    p.name += "x";
                    return bad;
                }
            bad.params.front().name += "x";
            break;
        case ErrorKind::MissingRequiredSlot:
            for (std::size_t i = 0; i < bad.params.size(); ++i)
                if (intent->intent->is_required(bad.params[i].name)) {
                    bad.params.erase(bad.params.begin() + static_cast<long>(i));
                    break;
                }
            break;
    }
    return bad;
}

Outcome feedback_convergence(Check& c, std::string& note) {
    const std::vector<Injection> cases{{"single_07", ErrorKind::UnknownMethod},
                                       {"single_01", ErrorKind::UnknownSlot},
                                       {"single_08", ErrorKind::MissingRequiredSlot}};
    std::size_t full_with = 0, full_without = 0;
    for (const auto& inj : cases) {
        const CorpusItem* item = corpus().find(inj.dialog);
        if (!item) {
            c.expect(false, std::string("missing corpus item ") + inj.dialog);
            continue;
        }
        const auto reg = corpus().registry_for(*item);
        auto script = oracle_script(corpus());
        const std::size_t k = testsupport::call_step(*item->gold_transcript);
        const ApiCall& gold = item->gold_calls().front();
        const ApiCall bad = inject(gold, inj.kind, reg);
        const auto v = validate(bad, reg);
        c.expect(!v.ok && std::any_of(v.errors.begin(), v.errors.end(),
                                      [&](const ValidationError& e) { return e.kind == inj.kind; }),
                 std::string(inj.dialog) + ": injection does not produce " + to_string(inj.kind));
        script.set_attempts(item->dialog_id, k, {serialize(bad), *script.find(item->dialog_id, k)->begin()});

        for (bool no_feedback : {false, true}) {
            ReplayBackend backend(script);
            SessionOptions opts;
            opts.no_feedback = no_feedback;
            const SessionSpec spec{item->dialog_id, item->domains, item->goal};
            const auto t = run_session(spec, reg, backend, *item->gold_transcript,
                                       SearchProvider::replay(item->replay_results), opts);
            const auto score = score_dialog(t, item->gold(), reg);
            std::size_t full = 0;
            for (const auto& cs : score.call_scores) full += cs.full_ok ? 1 : 0;
            if (no_feedback) {
                full_without += full;
                continue;
            }
            full_with += full;
            const std::string id = inj.dialog;
            c.expect(t.count(Role::Feedback) == 1, id + ": feedback turns " + std::to_string(t.count(Role::Feedback)));
            for (const auto& turn : t.turns)
                if (turn.role == Role::ApiCall) {
                    c.expect(turn.call && validate(*turn.call, reg).ok, id + ": final call invalid");
                    c.expect(turn.attempt_trail.size() == 2,
                             id + ": attempt trail " + std::to_string(turn.attempt_trail.size()));
                }
        }
    }
    c.expect(full_without < full_with,
             "no-feedback full matches " + std::to_string(full_without) + " vs " + std::to_string(full_with));
    note = "full matches " + std::to_string(full_with) + " with feedback, " + std::to_string(full_without) + " without";
    return Outcome::Pass;
}

Outcome validator_completeness(Check& c, std::string& note) {
    std::size_t corruptions = 0, detected = 0, clean = 0, false_pos = 0;
    auto has = [](const ValidationVerdict& v, ErrorKind k) {
        return std::any_of(v.errors.begin(), v.errors.end(), [&](const ValidationError& e) { return e.kind == k; });
    };
    for (const auto& item : corpus().items) {
        const auto reg = corpus().registry_for(item);
        for (const auto& gold : item.gold_calls()) {
            ++clean;
            if (!validate(gold, reg).ok) {
                ++false_pos;
                c.expect(false, item.dialog_id + ": gold call rejected");
                continue;
            }
            const auto intent = resolve_intent(reg, gold.method);

            ApiCall renamed = gold;
            renamed.method += "Zz";
            ++corruptions;
            detected += has(validate(renamed, reg), ErrorKind::UnknownMethod) ? 1 : 0;

            for (std::size_t i = 0; i < gold.params.size(); ++i) {
                ApiCall slot = gold;
                slot.params[i].name = "zz_" + slot.params[i].name;
                ++corruptions;
                detected += has(validate(slot, reg), ErrorKind::UnknownSlot) ? 1 : 0;

                if (!intent->intent->is_required(gold.params[i].name)) continue;
                ApiCall del = gold;
                del.params.erase(del.params.begin() + static_cast<long>(i));
                const auto v = validate(del, reg);
                ++corruptions;
                const bool ok = v.errors.size() == 1 && v.errors[0].kind == ErrorKind::MissingRequiredSlot &&
                                v.errors[0].offending_names == std::vector<std::string>{gold.params[i].name};
                detected += ok ? 1 : 0;
            }
        }
    }
    c.expect(detected == corruptions, "detected " + std::to_string(detected) + "/" + std::to_string(corruptions));
    c.expect(false_pos == 0, std::to_string(false_pos) + " false positives");
    note = std::to_string(detected) + "/" + std::to_string(corruptions) + " detected, 0/" + std::to_string(clean) +
           " false positives";
    return Outcome::Pass;
}

Outcome parser_robustness(Check& c, std::string& note) {
    grammar::Gen gen(2024);
    std::size_t fails = 0;
    std::vector<std::string> ops_seen;
    for (int i = 0; i < 1000; ++i) {
        auto [text, expected] = gen.call();
        bool ok = false;
        try {
            auto lib = extract_api_call(text);
            if (lib && grammar::from_lib(*lib) == expected) {
                const ApiCall canon = canonicalize(*lib);
                auto again = extract_api_call(serialize(canon));
                ok = again && same_call(canonicalize(*again), canon);
                for (const auto& p : lib->params) ops_seen.push_back(to_string(p.op));
            }
        } catch (const std::exception&) {
        }
        if (!ok) {
            if (fails < 5) c.failures.push_back("round trip failed: " + text);
            ++fails;
        }
    }
    std::sort(ops_seen.begin(), ops_seen.end());
    ops_seen.erase(std::unique(ops_seen.begin(), ops_seen.end()), ops_seen.end());
    c.expect(ops_seen.size() >= 5, "operator tags seen: " + std::to_string(ops_seen.size()));

    std::vector<std::string> seeds;
    for (int i = 0; i < 50; ++i) seeds.push_back(gen.call().first);
    std::size_t crashes = 0, found = 0, rejected = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::string s = gen.noise(seeds);
        try {
            if (extract_api_call(s)) ++found;
        } catch (const ParseError&) {
            ++rejected;
        } catch (...) {
            ++crashes;
        }
    }
    c.expect(crashes == 0, std::to_string(crashes) + " unexpected exceptions in fuzzing");
    note = "1000 round trips, " + std::to_string(fails) + " failures; fuzz 10000 texts, " + std::to_string(found) +
           " calls found, " + std::to_string(rejected) + " ParseError";
    return Outcome::Pass;
}

Outcome entropy_oracle(Check& c, std::string& note) {
    double worst = 0;
    for (const auto& text : oracle::entropy_texts()) {
        const auto tokens = tokenize(text);
        const auto lib = entropy(tokens);
        const auto [se, ce] = oracle::entropies(tokens);
        worst = std::max({worst, std::abs(lib.se_bits - se), std::abs(lib.ce_bits - ce)});
        c.expect(std::abs(lib.se_bits - se) <= 1e-9, "SE mismatch on: " + text);
        c.expect(std::abs(lib.ce_bits - ce) <= 1e-9, "CE mismatch on: " + text);
    }
    c.expect(entropy(tokenize("a a a a")).se_bits == 0.0, "SE of a a a a is not 0");
    char buf[64];
    std::snprintf(buf, sizeof buf, "max deviation %.3g", worst);
    note = buf;
    return Outcome::Pass;
}

Outcome success_trend(Check& c, std::string& note) {
    std::vector<ApiCall> pool;
    for (const auto& item : corpus().items)
        for (const auto& call : item.gold_calls())
            if (!call.params.empty()) pool.push_back(call);
    std::mt19937_64 rng(42);
    double worst = 0;
    for (double p : {0.9, 0.7}) {
        std::bernoulli_distribution hit(p);
        for (std::size_t n = 1; n <= 5; ++n) {
            std::vector<DialogScore> scores;
            for (int d = 0; d < 1000; ++d) {
                DialogGold gold;
                DialogTranscript t;
                t.dialog_id = "synthetic";
                for (std::size_t k = 0; k < n; ++k) {
                    const ApiCall& g = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
                    gold.calls.push_back(g);
                    ApiCall gen = g;
                    if (!hit(rng)) gen.params.front().values = {"zz-mismatch"};
                    Turn turn;
                    turn.role = Role::ApiCall;
                    turn.text = serialize(gen);
                    turn.call = gen;
                    t.turns.push_back(std::move(turn));
                    Turn reply;
                    reply.role = Role::System;
                    reply.text = "Done.";
                    t.turns.push_back(std::move(reply));
                }
                scores.push_back(score_dialog(t, gold, corpus().registry));
            }
            const double rate = *aggregate(scores).both().success_rate();
            const double want = std::pow(p, static_cast<double>(n));
            worst = std::max(worst, std::abs(rate - want));
            c.expect(std::abs(rate - want) <= 0.03,
                     "p=" + fmt(p) + " n=" + std::to_string(n) + ": " + fmt(rate) + " vs " + fmt(want));
        }
    }
    note = "seed 42, max |rate - p^n| = " + fmt(worst);
    return Outcome::Pass;
}

Outcome golden_prompts(Check& c, std::string& note) {
    const CorpusItem* item = corpus().find("multi_01");
    if (!item) {
        c.expect(false, "missing multi_01");
        return Outcome::Fail;
    }
    std::vector<DomainSchema> targets;
    const auto reg = corpus().registry_for(*item);
    for (const auto& d : reg.domains()) targets.push_back(*d);
    const auto seeds = load_seeds(testsupport::corpus_dir() / "seeds");
    const auto& seed = choose_seed(seeds, targets);
    const auto p1 = render_p1(seed.schema, seed.dialog, targets).rendered;
    const auto example = parse_stage1_completion(render_stage1_dialog(*item->gold_transcript));
    const std::vector<Turn> history(item->gold_transcript->turns.begin(), item->gold_transcript->turns.begin() + 3);
    const auto p2 = render_p2(targets, example, history).rendered;
    const auto g1 = testsupport::slurp(testsupport::fixture("golden/v1/p1.txt"));
    const auto g2 = testsupport::slurp(testsupport::fixture("golden/v1/p2.txt"));
    c.expect(p1 == g1, "P1 differs from golden file");
    c.expect(p2 == g2, "P2 differs from golden file");
    c.expect(p2.find("ideally, ask one slot at a time") != std::string::npos, "P2 lacks the one-slot guideline");
    c.expect(p2.find("Confirm the slot values") != std::string::npos, "P2 lacks the confirmation guideline");
    note = std::to_string(p1.size()) + " + " + std::to_string(p2.size()) + " bytes";
    return Outcome::Pass;
}

Outcome sgd_ingestion(Check& c, std::string& note) {
    const char* dir = std::getenv("TODKIT_SGD_TEST_DIR");
    if (!dir || !*dir) {
        note = "TODKIT_SGD_TEST_DIR not set";
        return Outcome::Skip;
    }
    const IngestResult r = convert_sgd(dir);
    c.expect(r.items.size() == 4201, "dialogs " + std::to_string(r.items.size()));
    c.expect(r.total_calls == 13239, "api calls " + std::to_string(r.total_calls));
    note = std::to_string(r.items.size()) + " dialogs, " + std::to_string(r.total_calls) + " calls";
    return Outcome::Pass;
}

}  // namespace

int main() {
    report(1, "oracle identity end to end", oracle_identity);
    report(2, "error injection exactness", error_injection);
    report(3, "feedback loop convergence", feedback_convergence);
    report(4, "validator completeness", validator_completeness);
    report(5, "parser robustness", parser_robustness);
    report(6, "entropy oracle", entropy_oracle);
    report(7, "success rate trend", success_trend);
    report(8, "prompt golden files", golden_prompts);
    report(9, "SGD ingestion counts", sgd_ingestion);
    return failed == 0 ? 0 : 1;
}
