#include "todkit/app.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "todkit/error.hpp"
#include "todkit/orchestrator.hpp"
#include "todkit/search.hpp"
#include "todkit/simulator.hpp"
#include "todkit/text.hpp"
#include "todkit/validator.hpp"

namespace fs = std::filesystem;

namespace todkit {

namespace {

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MalformedDocument("cannot write " + path.string());
    out << content;
}

fs::path seeds_dir(const RunConfig& cfg) {
    return cfg.seeds_dir.empty() ? fs::path(cfg.corpus) / "seeds" : fs::path(cfg.seeds_dir);
}

std::vector<DomainSchema> schemas_of(const SchemaRegistry& registry) {
    std::vector<DomainSchema> out;
    for (const auto& d : registry.domains()) out.push_back(*d);
    return out;
}

std::size_t count_role(const DialogTranscript& t, Role role) { return t.count(role); }

}  // namespace

std::shared_ptr<Backend> make_backend(const RunConfig& cfg, const Corpus& corpus) {
    if (cfg.backend == "none") return nullptr;
    if (cfg.backend == "oracle") return make_replay_backend(oracle_script(corpus), "oracle-replay");
    if (cfg.backend == "replay")
        return make_replay_backend(ReplayScript::load(cfg.replay_script), "replay:" + fs::path(cfg.replay_script).filename().string());
    HttpBackendConfig h;
    h.endpoint = cfg.endpoint;
    h.model_id = cfg.model_id;
    h.api_key_env = cfg.api_key_env;
    h.timeout_ms = static_cast<int>(cfg.timeout_ms);
    h.max_concurrency = static_cast<int>(cfg.max_concurrency);
    return std::make_shared<HttpBackend>(h);
}

RunOutcome run_corpus(const RunConfig& cfg, const Corpus& corpus, Backend& backend, ExemplarCache& cache) {
    const std::string fingerprint = config_fingerprint(cfg, corpus.digest);
    std::vector<SeedExemplar> seeds;
    if (fs::is_directory(seeds_dir(cfg))) seeds = load_seeds(seeds_dir(cfg));
    if (seeds.empty()) throw ConfigError("no seed exemplars under " + seeds_dir(cfg).string());

    std::map<std::string, std::vector<Row>> tables;
    if (cfg.search_mode == "tabular") tables = load_tables(cfg.tables_dir);

    SessionOptions opts;
    opts.no_feedback = cfg.no_feedback;
    opts.no_chain = cfg.no_chain;
    opts.max_feedback_retries = static_cast<std::size_t>(cfg.max_feedback_retries);
    opts.turn_cap = static_cast<std::size_t>(cfg.turn_cap);
    opts.model_id = cfg.model_id;
    opts.temperature = cfg.temperature;
    opts.max_tokens = static_cast<int>(cfg.max_tokens);
    opts.config_fingerprint = fingerprint;

    const std::size_t n = corpus.items.size();
    std::vector<DialogTranscript> transcripts(n);
    std::vector<nlohmann::ordered_json> entries(n);
    std::atomic<std::size_t> next{0};

    auto run_one = [&](std::size_t i) {
        const CorpusItem& item = corpus.items[i];
        const SchemaRegistry registry = corpus.registry_for(item);
        const std::vector<DomainSchema> targets = schemas_of(registry);
        const SeedExemplar& seed = choose_seed(seeds, targets);
        nlohmann::ordered_json entry;
        entry["dialog_id"] = item.dialog_id;

        DialogTranscript exemplar;
        std::string source;
        if (cfg.no_chain) {
            exemplar = seed.dialog;
            source = "source-dialog-fallback";
        } else {
            try {
                exemplar = generate_exemplar(backend, {&seed, targets, cfg.model_id, 2048}, &cache);
                source = "generated";
            } catch (const ExemplarGenerationFailed& e) {
                if (!cfg.exemplar_fallback) {
                    entry["status"] = "exemplar_failed";
                    entry["error"] = e.what();
                    transcripts[i].dialog_id = item.dialog_id;
                    transcripts[i].domains = item.domains;
                    transcripts[i].config_fingerprint = fingerprint;
                    transcripts[i].status = SessionStatus::BackendFailed;
                    entries[i] = entry;
                    return;
                }
                exemplar = seed.dialog;
                source = "source-dialog-fallback";
                entry["exemplar_error"] = e.what();
            } catch (const BackendError& e) {
                entry["status"] = to_string(SessionStatus::BackendFailed);
                entry["exemplar_source"] = "none";
                entry["error"] = e.what();
                DialogTranscript& t = transcripts[i];
                t.dialog_id = item.dialog_id;
                t.domains = item.domains;
                t.config_fingerprint = fingerprint;
                t.status = SessionStatus::BackendFailed;
                entries[i] = entry;
                return;
            }
        }
        entry["exemplar_source"] = source;
        entry["exemplar_seed"] = seed.dataset;

        SessionSpec spec{item.dialog_id, item.domains, item.goal};
        SearchProvider provider = cfg.search_mode == "tabular" ? SearchProvider::tabular(tables)
                                                               : SearchProvider::replay(item.replay_results);
        std::unique_ptr<UserSimulator> sim;
        if (cfg.user_simulator == "llm")
            sim = std::make_unique<LlmSimulator>(std::shared_ptr<Backend>(&backend, [](Backend*) {}), cfg.model_id);
        try {
            // A seed dialog from another domain is not held to the target-schema check.
            SessionOptions session_opts = opts;
            if (source != "generated") session_opts.no_chain = true;
            transcripts[i] = run_session(spec, registry, backend, exemplar, std::move(provider), session_opts, sim.get());
        } catch (const SessionBackendError& e) {
            transcripts[i] = e.partial();
            entry["error"] = e.what();
        } catch (const Error& e) {
            DialogTranscript& t = transcripts[i];
            t.dialog_id = item.dialog_id;
            t.domains = item.domains;
            t.config_fingerprint = fingerprint;
            t.status = SessionStatus::BackendFailed;
            entry["error"] = e.what();
        }
        const DialogTranscript& t = transcripts[i];
        entry["status"] = to_string(t.status);
        entry["turns"] = t.turns.size();
        entry["api_calls"] = count_role(t, Role::ApiCall);
        entry["feedback_turns"] = count_role(t, Role::Feedback);
        entries[i] = entry;
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.concurrency), std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) run_one(i);
        });
    for (auto& th : pool) th.join();

    RunOutcome outcome;
    for (const auto& t : transcripts)
        if (t.status == SessionStatus::Completed && !t.turns.empty()) ++outcome.completed;
    auto& m = outcome.manifest;
    m["config_fingerprint"] = fingerprint;
    m["template_version"] = kTemplateVersion;
    m["backend"] = backend.identity();
    m["model_id"] = cfg.model_id;
    m["corpus_digest"] = corpus.digest;
    m["no_feedback"] = cfg.no_feedback;
    m["no_chain"] = cfg.no_chain;
    m["seed"] = cfg.seed;
    m["config"] = cfg.to_json();
    m["dialogs_total"] = n;
    m["dialogs_completed"] = outcome.completed;
    m["backend_calls"] = backend.calls();
    m["dialogs"] = entries;
    outcome.transcripts = std::move(transcripts);
    return outcome;
}

EvalReport score_transcripts(const std::vector<DialogTranscript>& transcripts, const Corpus& corpus,
                             double threshold) {
    if (transcripts.empty()) throw MalformedDocument("no transcripts to score");
    std::map<std::string, const DialogTranscript*> by_id;
    for (const auto& t : transcripts) {
        if (!corpus.find(t.dialog_id)) throw MalformedDocument("transcript " + t.dialog_id + " is not in the corpus");
        by_id[t.dialog_id] = &t;
    }
    std::vector<DialogScore> scores;
    for (const auto& item : corpus.items) {
        DialogTranscript empty;
        empty.dialog_id = item.dialog_id;
        empty.domains = item.domains;
        auto it = by_id.find(item.dialog_id);
        const DialogTranscript& t = it == by_id.end() ? empty : *it->second;
        scores.push_back(score_dialog(t, item.gold(), corpus.registry_for(item), threshold));
    }
    return aggregate(scores, threshold);
}

int cmd_validate(const fs::path& schema, const std::string& call_text, std::ostream& out, std::ostream& err) {
    SchemaRegistry registry;
    try {
        registry = fs::is_directory(schema) ? load_registry_dir(schema) : SchemaRegistry({load_schema_file(schema)});
    } catch (const Error& e) {
        err << "schema load failed: " << e.what() << "\n";
        return 3;
    }
    std::optional<ApiCall> call;
    try {
        call = extract_api_call(call_text);
    } catch (const ParseError& e) {
        err << "parse error at offset " << e.offset() << ": " << e.what() << "\n";
        return 2;
    }
    if (!call) {
        err << "no APICall( found in input\n";
        return 2;
    }
    try {
        const auto verdict = validate(canonicalize(*call), registry);
        if (verdict.ok) {
            out << "valid: " << serialize(canonicalize(*call)) << "\n";
            return 0;
        }
        out << "invalid\n" << feedback_message(verdict, registry) << "\n";
        return 1;
    } catch (const AmbiguousIntent& e) {
        err << e.what() << "\n";
        return 3;
    }
}

int cmd_gen_example(const RunConfig& cfg, const std::vector<std::string>& domains, std::ostream& out,
                    std::ostream& err) {
    if (cfg.backend == "none") {
        err << "no backend configured\n";
        return 3;
    }
    try {
        const Corpus corpus = load_corpus(cfg.corpus);
        std::vector<std::string> names = domains;
        if (names.empty()) {
            err << "no target domains given\n";
            return 2;
        }
        for (const auto& d : names)
            if (!corpus.registry.find(d)) {
                err << "unknown domain " << d << "\n";
                return 2;
            }
        const SchemaRegistry registry = corpus.registry.subset(names);
        const auto targets = schemas_of(registry);
        const auto seeds = load_seeds(seeds_dir(cfg));
        if (seeds.empty()) {
            err << "no seed exemplars under " << seeds_dir(cfg) << "\n";
            return 2;
        }
        const SeedExemplar& seed = choose_seed(seeds, targets);
        auto backend = make_backend(cfg, corpus);
        ExemplarCache cache = cfg.cache_dir.empty() ? ExemplarCache() : ExemplarCache(cfg.cache_dir);
        const fs::path dir = fs::path(cfg.out) / "exemplars";
        const std::string stem = exemplar_cache_key(names, cfg.model_id);
        try {
            DialogTranscript ex = generate_exemplar(*backend, {&seed, targets, cfg.model_id, 2048}, &cache);
            write_transcripts_file(dir / (stem + ".jsonl"), {ex});
            nlohmann::ordered_json q;
            q["domains"] = names;
            q["seed"] = seed.dataset;
            q["turns"] = ex.turns.size();
            q["api_calls"] = ex.count(Role::ApiCall);
            q["alternating"] = roles_alternate(ex.turns);
            q["passes_quality_check"] = exemplar_quality_check(ex, registry);
            q["backend_calls"] = backend->calls();
            write_file(dir / (stem + ".quality.json"), q.dump(2) + "\n");
            out << "exemplar written to " << (dir / (stem + ".jsonl")).string() << "\n";
            out << "backend calls: " << backend->calls() << "\n";
            return 0;
        } catch (const ExemplarGenerationFailed& e) {
            write_file(dir / (stem + ".failed.txt"), e.last_completion());
            err << e.what() << "\nraw completion saved to " << (dir / (stem + ".failed.txt")).string() << "\n";
            return 1;
        } catch (const BackendError& e) {
            err << e.what() << "\n";
            return 1;
        }
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const Corpus corpus = load_corpus(cfg.corpus);
        auto backend = make_backend(cfg, corpus);
        if (!backend) {
            err << "no backend configured\n";
            return 3;
        }
        ExemplarCache cache = cfg.cache_dir.empty() ? ExemplarCache() : ExemplarCache(cfg.cache_dir);
        const RunOutcome outcome = run_corpus(cfg, corpus, *backend, cache);
        const fs::path dir(cfg.out);
        fs::create_directories(dir);
        write_transcripts_file(dir / "transcripts.jsonl", outcome.transcripts);
        write_file(dir / "manifest.json", outcome.manifest.dump(2) + "\n");
        out << "dialogs: " << outcome.transcripts.size() << ", completed: " << outcome.completed << "\n";
        out << "transcripts: " << (dir / "transcripts.jsonl").string() << "\n";
        return outcome.completed > 0 ? 0 : 1;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
}

int cmd_score(const RunConfig& cfg, const fs::path& transcripts_path, std::ostream& out, std::ostream& err) {
    std::vector<DialogTranscript> transcripts;
    Corpus corpus;
    try {
        corpus = load_corpus(cfg.corpus);
        transcripts = read_transcripts_file(transcripts_path);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
    EvalReport report;
    try {
        report = score_transcripts(transcripts, corpus, cfg.fuzzy_threshold);
    } catch (const MalformedDocument& e) {
        err << e.what() << "\n";
        return 2;
    }
    const fs::path dir(cfg.out);
    write_file(dir / "report.json", report.to_json().dump(2) + "\n");
    write_file(dir / "report.txt", report.table());
    write_file(dir / "success_by_calls.csv", report.histogram_csv());
    out << report.table();
    return 0;
}

int cmd_report(const fs::path& report_path, std::ostream& out, std::ostream& err) {
    std::ifstream in(report_path);
    if (!in) {
        err << "cannot open " << report_path.string() << "\n";
        return 2;
    }
    try {
        const auto j = nlohmann::json::parse(in);
        const EvalReport r = EvalReport::from_json(j);
        out << r.table();
        out << "\n" << r.histogram_csv();
        return 0;
    } catch (const nlohmann::json::exception& e) {
        err << report_path.string() << ": " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
}

}  // namespace todkit
