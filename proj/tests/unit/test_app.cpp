#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "todkit/app.hpp"
#include "todkit/error.hpp"

using namespace todkit;
namespace fs = std::filesystem;

namespace {

RunConfig config(const fs::path& out) {
    RunConfig c;
    c.corpus = testsupport::corpus_dir().string();
    c.out = out.string();
    c.concurrency = 4;
    return c;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(testsupport::slurp(p)); }

}  // namespace

TEST_SUITE("app") {

TEST_CASE("validate exit codes") {
    const auto schemas = testsupport::corpus_dir() / "schemas";
    std::ostringstream out, err;
    CHECK(cmd_validate(schemas, "APICall(method='GetWeather', parameters={city: Paris})", out, err) == 0);
    CHECK(out.str().rfind("valid: ", 0) == 0);
    out.str("");
    CHECK(cmd_validate(schemas, "APICall(method='GetWeather', parameters={citty: Paris})", out, err) == 1);
    CHECK(out.str().find("Did you mean \"city\"?") != std::string::npos);
    CHECK(cmd_validate(schemas / "Weather.json", "APICall(method='GetWeather', parameters={city: Paris})", out, err) == 0);
    CHECK(cmd_validate(schemas, "no call here", out, err) == 2);
    CHECK(cmd_validate(schemas, "APICall(method='GetWeather', parameters={city: Par", out, err) == 2);
    CHECK(cmd_validate(schemas / "missing.json", "APICall(method='X', parameters={})", out, err) == 3);

    const auto dir = testsupport::scratch("ambiguous");
    fs::copy_file(schemas / "Weather.json", dir / "a.json");
    auto doc = read_json(schemas / "Weather.json");
    doc["service_name"] = "Weather2";
    testsupport::spit(dir / "b.json", doc.dump());
    CHECK(cmd_validate(dir, "APICall(method='GetWeather', parameters={city: Paris})", out, err) == 3);
}

TEST_CASE("oracle run, score and report") {
    const auto out_dir = testsupport::scratch("run");
    const auto cfg = config(out_dir);
    std::ostringstream out, err;
    REQUIRE(cmd_run(cfg, out, err) == 0);
    const auto transcripts = read_transcripts_file(out_dir / "transcripts.jsonl");
    CHECK(transcripts.size() == 20);
    const auto manifest = read_json(out_dir / "manifest.json");
    CHECK(manifest["dialogs_total"] == 20);
    CHECK(manifest["dialogs_completed"] == 20);
    CHECK(manifest["no_feedback"] == false);
    CHECK(manifest["template_version"] == "v1");
    CHECK(manifest["backend"] == "oracle-replay");
    for (const auto& d : manifest["dialogs"]) {
        CHECK(d["exemplar_source"] == "generated");
        CHECK(d["feedback_turns"] == 0);
    }
    for (const auto& t : transcripts) CHECK(t.config_fingerprint == manifest["config_fingerprint"]);

    REQUIRE(cmd_score(cfg, out_dir / "transcripts.jsonl", out, err) == 0);
    for (const char* f : {"report.json", "report.txt", "success_by_calls.csv"}) CHECK(fs::exists(out_dir / f));
    const auto report = read_json(out_dir / "report.json");
    CHECK(report["both"]["full_api_accuracy"] == 1.0);
    CHECK(report["both"]["dialog_success_rate"] == 1.0);
    CHECK(report["both"]["inform_accuracy"] == 1.0);

    std::ostringstream rep;
    CHECK(cmd_report(out_dir / "report.json", rep, err) == 0);
    CHECK(rep.str().find("Full API") != std::string::npos);
    CHECK(cmd_report(out_dir / "nope.json", rep, err) == 2);
    testsupport::spit(out_dir / "bad.json", "{\"x\": 1}");
    CHECK(cmd_report(out_dir / "bad.json", rep, err) == 2);
}

TEST_CASE("score rejects empty and foreign input") {
    const auto dir = testsupport::scratch("score");
    const auto cfg = config(dir);
    std::ostringstream out, err;
    testsupport::spit(dir / "empty.jsonl", "");
    CHECK(cmd_score(cfg, dir / "empty.jsonl", out, err) == 2);
    testsupport::spit(dir / "foreign.jsonl", R"({"dialog_id": "zzz", "role": "user", "text": "hi"})" "\n");
    CHECK(cmd_score(cfg, dir / "foreign.jsonl", out, err) == 2);
    CHECK(cmd_score(cfg, dir / "absent.jsonl", out, err) == 2);
}

TEST_CASE("partial transcripts score missing dialogs as empty") {
    const auto& c = testsupport::corpus();
    DialogTranscript only = *c.find("single_01")->gold_transcript;
    only.dialog_id = "single_01";
    const auto r = score_transcripts({only}, c, 0.8);
    CHECK(r.both().dialogs == c.items.size());
    CHECK(r.both().successes == 1);
    CHECK_THROWS_AS(score_transcripts({}, c, 0.8), MalformedDocument);
}

TEST_CASE("ablation flags reach the manifest") {
    const auto dir = testsupport::scratch("ablation");
    auto cfg = config(dir);
    cfg.no_chain = true;
    cfg.no_feedback = true;
    std::ostringstream out, err;
    REQUIRE(cmd_run(cfg, out, err) == 0);
    const auto manifest = read_json(dir / "manifest.json");
    CHECK(manifest["no_feedback"] == true);
    CHECK(manifest["no_chain"] == true);
    for (const auto& d : manifest["dialogs"]) CHECK(d["exemplar_source"] == "source-dialog-fallback");

    auto plain = config(testsupport::scratch("plain"));
    CHECK(manifest["config_fingerprint"] != config_fingerprint(plain, testsupport::corpus().digest));
}

TEST_CASE("gen-example") {
    const auto dir = testsupport::scratch("genex");
    auto cfg = config(dir);
    std::ostringstream out, err;

    auto none = cfg;
    none.backend = "none";
    CHECK(cmd_gen_example(none, {"Weather"}, out, err) == 3);
    CHECK(cmd_gen_example(cfg, {"Atlantis"}, out, err) == 2);
    CHECK(cmd_gen_example(cfg, {}, out, err) == 2);

    cfg.cache_dir = (dir / "cache").string();
    REQUIRE(cmd_gen_example(cfg, {"Weather"}, out, err) == 0);
    CHECK(out.str().find("backend calls: 1") != std::string::npos);
    const auto stem = exemplar_cache_key({"Weather"}, cfg.model_id);
    CHECK(fs::exists(dir / "exemplars" / (stem + ".jsonl")));
    const auto q = read_json(dir / "exemplars" / (stem + ".quality.json"));
    CHECK(q["passes_quality_check"] == true);

    std::ostringstream again;
    REQUIRE(cmd_gen_example(cfg, {"Weather"}, again, err) == 0);
    CHECK(again.str().find("backend calls: 0") != std::string::npos);

    ReplayScript junk;
    junk.set(exemplar_session_id({"Weather"}), 0, "I cannot help with that.");
    testsupport::spit(dir / "junk.json", junk.to_json().dump());
    auto failing = config(dir);
    failing.backend = "replay";
    failing.replay_script = (dir / "junk.json").string();
    std::ostringstream fail_err;
    CHECK(cmd_gen_example(failing, {"Weather"}, out, fail_err) == 1);
    CHECK(testsupport::slurp(dir / "exemplars" / (stem + ".failed.txt")) == "I cannot help with that.");
}

TEST_CASE("exemplar failure falls back to the seed dialog") {
    const auto dir = testsupport::scratch("fallback");
    auto script = oracle_script(testsupport::corpus());
    script.set(exemplar_session_id({"Weather"}), 0, "garbage");
    testsupport::spit(dir / "script.json", script.to_json().dump());
    auto cfg = config(dir);
    cfg.backend = "replay";
    cfg.replay_script = (dir / "script.json").string();
    std::ostringstream out, err;
    REQUIRE(cmd_run(cfg, out, err) == 0);
    const auto manifest = read_json(dir / "manifest.json");
    std::size_t fallbacks = 0;
    for (const auto& d : manifest["dialogs"])
        if (d["exemplar_source"] == "source-dialog-fallback") {
            ++fallbacks;
            CHECK(d.contains("exemplar_error"));
        }
    CHECK(fallbacks > 0);
    CHECK(manifest["dialogs_completed"] == 20);
}

TEST_CASE("run without a backend") {
    auto cfg = config(testsupport::scratch("nobackend"));
    cfg.backend = "none";
    std::ostringstream out, err;
    CHECK(cmd_run(cfg, out, err) == 3);
}

}
