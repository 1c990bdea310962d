#pragma once

#include <filesystem>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "todkit/backend.hpp"
#include "todkit/config.hpp"
#include "todkit/corpus.hpp"
#include "todkit/metrics.hpp"
#include "todkit/prompting.hpp"
#include "todkit/transcript.hpp"

namespace todkit {

/// nullptr for backend = none. The oracle profile replays the corpus gold transcripts.
std::shared_ptr<Backend> make_backend(const RunConfig& cfg, const Corpus& corpus);

struct RunOutcome {
    std::vector<DialogTranscript> transcripts;
    nlohmann::ordered_json manifest;
    std::size_t completed = 0;
};

/// Runs every corpus item with at most cfg.concurrency sessions in flight.
/// Transcripts come back in corpus order; failed sessions keep their partial turns.
RunOutcome run_corpus(const RunConfig& cfg, const Corpus& corpus, Backend& backend, ExemplarCache& cache);

/// Scores transcripts against the corpus. Throws MalformedDocument on an
/// empty input or a dialog id the corpus does not know. Corpus items with no
/// transcript are scored as empty dialogs.
EvalReport score_transcripts(const std::vector<DialogTranscript>& transcripts, const Corpus& corpus,
                             double threshold);

// Subcommands. Each returns the process exit status.
int cmd_validate(const std::filesystem::path& schema, const std::string& call_text, std::ostream& out,
                 std::ostream& err);
int cmd_gen_example(const RunConfig& cfg, const std::vector<std::string>& domains, std::ostream& out,
                    std::ostream& err);
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_score(const RunConfig& cfg, const std::filesystem::path& transcripts, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& report, std::ostream& out, std::ostream& err);

}  // namespace todkit
