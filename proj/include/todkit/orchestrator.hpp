#pragma once

#include <memory>
#include <string>
#include <vector>

#include "todkit/backend.hpp"
#include "todkit/error.hpp"
#include "todkit/schema.hpp"
#include "todkit/search.hpp"
#include "todkit/simulator.hpp"
#include "todkit/transcript.hpp"

namespace todkit {

struct SessionOptions {
    bool no_feedback = false;
    bool no_chain = false;
    std::size_t max_feedback_retries = 3;
    /// Cap on top-level turns (user turns + system steps).
    std::size_t turn_cap = 40;
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string config_fingerprint;
};

/// Carries the transcript recorded up to the failure.
class SessionBackendError : public BackendError {
public:
    SessionBackendError(const BackendError& cause, DialogTranscript partial)
        : BackendError(cause), partial_(std::move(partial)) {}
    const DialogTranscript& partial() const noexcept { return partial_; }

private:
    DialogTranscript partial_;
};

struct SessionSpec {
    std::string dialog_id;
    std::vector<std::string> domains;
    UserGoal goal;
};

/// The user-role cue appended after the rendered prompt on every system step.
inline constexpr const char* kNextTurnCue = "Continue the conversation with the next System response.";

/// Runs one simulated dialog. `registry` holds the session's domain schemas in
/// registration order; `exemplar` is the in-context example dialog.
DialogTranscript run_session(const SessionSpec& spec, const SchemaRegistry& registry, Backend& backend,
                             const DialogTranscript& exemplar, SearchProvider provider,
                             const SessionOptions& opts, UserSimulator* simulator = nullptr);

}  // namespace todkit
