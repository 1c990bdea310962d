#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "todkit/app.hpp"
#include "todkit/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"todkit: schema-guided dialog generation and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    app.add_option("--config", config_path, "Run configuration file (key = value)");
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--out", out_dir, "Output directory");

    auto* validate = app.add_subcommand("validate", "Validate one API call against a schema file or directory");
    std::string schema_path, call_text;
    validate->add_option("schema", schema_path, "Schema JSON file or directory")->required();
    validate->add_option("call", call_text, "Text containing APICall(...); '-' reads stdin")->required();

    auto* gen = app.add_subcommand("gen-example", "Run stage-1 example-dialog synthesis for target domains");
    std::vector<std::string> domains;
    gen->add_option("domains", domains, "Target domain names")->required();

    auto* run = app.add_subcommand("run", "Simulate every corpus dialog");
    bool no_feedback = false, no_chain = false;
    run->add_flag("--no-feedback", no_feedback, "Disable the validation feedback loop");
    run->add_flag("--no-chain", no_chain, "Use the seed dialog instead of a generated example");

    auto* score = app.add_subcommand("score", "Score a transcripts file against the corpus");
    std::string transcripts_path;
    score->add_option("transcripts", transcripts_path, "transcripts.jsonl")->required();

    auto* report = app.add_subcommand("report", "Print a saved report.json");
    std::string report_path;
    report->add_option("report", report_path, "report.json")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        if (call_text == "-") {
            call_text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
        }
        return todkit::cmd_validate(schema_path, call_text, std::cout, std::cerr);
    }
    if (report->parsed()) return todkit::cmd_report(report_path, std::cout, std::cerr);

    todkit::RunConfig cfg;
    try {
        cfg = todkit::load_config(config_path.empty() ? std::nullopt
                                                      : std::optional<std::filesystem::path>(config_path));
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out = out_dir;
        if (no_feedback) cfg.no_feedback = true;
        if (no_chain) cfg.no_chain = true;
        cfg.check();
    } catch (const todkit::ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 2;
    }

    if (gen->parsed()) return todkit::cmd_gen_example(cfg, domains, std::cout, std::cerr);
    if (run->parsed()) return todkit::cmd_run(cfg, std::cout, std::cerr);
    if (score->parsed()) return todkit::cmd_score(cfg, transcripts_path, std::cout, std::cerr);
    return 2;
}
