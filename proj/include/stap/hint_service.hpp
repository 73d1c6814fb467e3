#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stap/exercise.hpp"
#include "stap/llm.hpp"
#include "stap/prompt.hpp"

namespace stap {

struct Session {
    std::string session_id;
    std::string participant_alias;
    std::string exercise_id;
    std::int64_t started_at = 0;
};

struct HintRating {
    std::string hint_id;
    int clear = 0;
    int fits = 0;
    int helpful = 0;
    std::optional<std::string> comment;
};

struct Hint {
    std::string hint_id;
    std::string session_id;
    std::string code_snapshot;
    Prompt prompt;
    std::string text;
    std::string model_id;
    std::int64_t created_at = 0;
    std::int64_t latency_ms = 0;
};

enum class EventKind { SessionStarted, SnapshotLogged, HintIssued, HintRated, SolutionChecked };

const char* to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view name);

// One line of a session log:
//   {"session_id":..,"seq":..,"kind":..,"at":..,"payload":{..}}
struct SessionEvent {
    std::string session_id;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::SessionStarted;
    std::int64_t at = 0;  // ms since epoch, strictly increasing within a session
    nlohmann::json payload;

    nlohmann::json to_json() const;
    static SessionEvent from_json(const nlohmann::json& j);
};

// Scores must be in 1..5; throws ValidationError naming the statement.
void validate_rating(const HintRating& rating);

// Aliases are short opaque tokens: 1-32 of [A-Za-z0-9_-].
void validate_alias(const std::string& alias);

nlohmann::json session_to_json(const Session& s);
nlohmann::json hint_to_json(const Hint& h);  // client view, no prompt

struct ServiceOptions {
    std::filesystem::path data_dir;
    RunnerConfig runner;
    std::function<std::int64_t()> clock;  // defaults to now_ms
    std::uint64_t alias_seed = 0;         // 0: seeded from the clock
};

// Event-sourced tutor backend. Every mutation is appended to
// <data_dir>/sessions/<session_id>.jsonl; constructing a service over an
// existing data directory replays those files.
class HintService {
public:
    HintService(std::vector<Exercise> catalog, std::shared_ptr<const LlmClient> llm, ServiceOptions options);

    // Student view: model solutions and tests are not included.
    nlohmann::json list_exercises() const;

    // An empty alias is replaced by a random number.
    Session start_session(const std::string& exercise_id, const std::string& participant_alias = {});

    // Logs the snapshot, renders the default prompt and asks the model.
    // NotFoundError for an unknown session; LLM errors propagate.
    Hint request_hint(const std::string& session_id, const std::string& source);

    void rate_hint(const HintRating& rating);

    CheckResult check(const std::string& session_id, const std::string& source);

    // JSONL in append order. nullopt exports every session ordered by start time.
    std::string export_events(const std::optional<std::string>& session_id = std::nullopt) const;

    // Canonical dump of sessions, hints and ratings (for round-trip checks).
    nlohmann::json state_json() const;

    std::size_t session_count() const;
    std::optional<Hint> find_hint(const std::string& hint_id) const;
    std::optional<HintRating> find_rating(const std::string& hint_id) const;

private:
    struct SessionState {
        Session session;
        std::vector<SessionEvent> events;
        std::vector<std::string> hint_ids;
    };

    void replay_directory();
    void apply(const SessionEvent& event, bool from_disk);
    SessionEvent append(SessionState& state, EventKind kind, nlohmann::json payload);
    SessionState& session_or_throw(const std::string& session_id);
    const Exercise& exercise_or_throw(const std::string& exercise_id) const;
    std::filesystem::path session_file(const std::string& session_id) const;
    std::string random_alias();

    std::vector<Exercise> catalog_;
    std::shared_ptr<const LlmClient> llm_;
    ServiceOptions options_;

    mutable std::mutex mutex_;
    std::map<std::string, SessionState> sessions_;
    std::map<std::string, Hint> hints_;
    std::map<std::string, HintRating> ratings_;
    std::uint64_t alias_state_;
};

} // namespace stap
