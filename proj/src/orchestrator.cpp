#include "todkit/orchestrator.hpp"

#include "todkit/prompting.hpp"
#include "todkit/validator.hpp"

namespace todkit {

namespace {

class Session {
public:
    Session(const SessionSpec& spec, const SchemaRegistry& registry, Backend& backend,
            const DialogTranscript& exemplar, SearchProvider provider, const SessionOptions& opts)
        : spec_(spec), registry_(registry), backend_(backend), exemplar_(exemplar),
          provider_(std::move(provider)), opts_(opts) {
        for (const auto& d : registry_.domains()) schemas_.push_back(*d);
        transcript_.dialog_id = spec.dialog_id;
        transcript_.domains = spec.domains;
        transcript_.config_fingerprint = opts.config_fingerprint;
    }

    DialogTranscript run(UserSimulator& simulator) {
        SimulatorState state = initial_state(spec_.goal);
        std::optional<std::string> last_step;
        std::size_t top_level = 0;
        try {
            while (true) {
                if (top_level >= opts_.turn_cap) {
                    transcript_.status = SessionStatus::Truncated;
                    break;
                }
                UserTurn ut;
                try {
                    ut = simulator.next(state, spec_.goal, last_step, registry_, transcript_.turns, spec_.dialog_id);
                } catch (const StuckDialog&) {
                    transcript_.status = SessionStatus::Stuck;
                    break;
                }
                state = std::move(ut.state);
                append(Role::User, std::move(ut.utterance));
                ++top_level;

                if (top_level >= opts_.turn_cap) {
                    transcript_.status = SessionStatus::Truncated;
                    break;
                }
                last_step = system_step();
                ++top_level;
                if (state.phase == SimPhase::Done) break;
            }
        } catch (const BackendError& e) {
            transcript_.status = SessionStatus::BackendFailed;
            throw SessionBackendError(e, transcript_);
        }
        return std::move(transcript_);
    }

private:
    Turn& append(Role role, std::string text) {
        Turn t;
        t.role = role;
        t.text = std::move(text);
        t.timestamp = clock_++;
        transcript_.turns.push_back(std::move(t));
        return transcript_.turns.back();
    }

    std::vector<Turn> visible_history() const {
        std::vector<Turn> out;
        for (const auto& t : transcript_.turns)
            if (t.role != Role::Feedback) out.push_back(t);
        return out;
    }

    GenerationRequest base_request() const {
        GenerationRequest req;
        req.messages = {{"system", render_p2(schemas_, exemplar_, visible_history()).rendered},
                        {"user", kNextTurnCue}};
        req.temperature = opts_.temperature;
        req.max_tokens = opts_.max_tokens;
        req.model_id = opts_.model_id;
        req.session_id = spec_.dialog_id;
        req.turn_index = step_;
        return req;
    }

    static std::optional<ApiCall> find_call(const std::string& text) {
        try {
            if (auto call = extract_api_call(text)) return canonicalize(std::move(*call));
        } catch (const ParseError&) {
        }
        return std::nullopt;
    }

    /// One system step; returns the text the simulator gets to see.
    std::string system_step() {
        GenerationRequest req = base_request();
        std::string raw = backend_.generate(req).text;
        std::optional<ApiCall> call = find_call(raw);
        if (!call) {
            ++step_;
            append(Role::System, raw);
            return raw;
        }

        std::vector<Attempt> trail;
        ValidationVerdict verdict = validate(*call, registry_);
        trail.push_back({raw, verdict});
        ApiCall final_call = *call;
        final_call.attempt_index = 0;
        while (!verdict.ok && !opts_.no_feedback && trail.size() <= opts_.max_feedback_retries) {
            const std::string feedback = feedback_message(verdict, registry_);
            append(Role::Feedback, feedback);
            req.messages.push_back({"assistant", raw});
            req.messages.push_back({"user", feedback});
            req.attempt = trail.size();
            raw = backend_.generate(req).text;
            if (auto retry = find_call(raw)) {
                final_call = std::move(*retry);
                final_call.attempt_index = trail.size();
                verdict = validate(final_call, registry_);
            }
            trail.push_back({raw, verdict});
        }
        ++step_;

        Turn& api = append(Role::ApiCall, raw);
        final_call.raw_span = {};
        api.call = final_call;
        api.attempt_trail = std::move(trail);

        const std::vector<Row> rows = verdict.ok ? provider_.lookup(final_call, registry_) : std::vector<Row>{};
        append(Role::SearchResults, render_search_results(rows));

        GenerationRequest reply_req = base_request();
        std::string reply = backend_.generate(reply_req).text;
        ++step_;
        append(Role::System, reply);
        return raw + "\n" + reply;
    }

    const SessionSpec& spec_;
    const SchemaRegistry& registry_;
    Backend& backend_;
    const DialogTranscript& exemplar_;
    SearchProvider provider_;
    const SessionOptions& opts_;
    std::vector<DomainSchema> schemas_;
    DialogTranscript transcript_;
    std::size_t step_ = 0;
    std::uint64_t clock_ = 0;
};

}  // namespace

DialogTranscript run_session(const SessionSpec& spec, const SchemaRegistry& registry, Backend& backend,
                             const DialogTranscript& exemplar, SearchProvider provider,
                             const SessionOptions& opts, UserSimulator* simulator) {
    if (!opts.no_chain && !exemplar_quality_check(exemplar, registry))
        throw ContractViolation("exemplar for " + spec.dialog_id + " fails the quality check");
    ScriptedSimulator scripted;
    Session session(spec, registry, backend, exemplar, std::move(provider), opts);
    return session.run(simulator ? *simulator : scripted);
}

}  // namespace todkit
