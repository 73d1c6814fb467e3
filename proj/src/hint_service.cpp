#include "stap/hint_service.hpp"

#include "stap/error.hpp"
#include "stap/util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

namespace stap {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<EventKind, const char*>, 5> kind_names = {{
    {EventKind::SessionStarted, "session_started"},
    {EventKind::SnapshotLogged, "snapshot_logged"},
    {EventKind::HintIssued, "hint_issued"},
    {EventKind::HintRated, "hint_rated"},
    {EventKind::SolutionChecked, "solution_checked"},
}};

void append_line(const fs::path& path, const std::string& line) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw ConfigError("cannot open event log " + path.string());
    out << line << '\n';
    out.flush();
    if (!out) throw ConfigError("failed to write event log " + path.string());
}

json rating_payload(const HintRating& r) {
    return {{"hint_id", r.hint_id},
            {"clear", r.clear},
            {"fits", r.fits},
            {"helpful", r.helpful},
            {"comment", r.comment ? json(*r.comment) : json(nullptr)}};
}

} // namespace

const char* to_string(EventKind kind) {
    for (const auto& [k, name] : kind_names) {
        if (k == kind) return name;
    }
    return "unknown";
}

EventKind event_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kind_names) {
        if (name == n) return k;
    }
    throw ParseError("unknown event kind '" + std::string(name) + "'");
}

json SessionEvent::to_json() const {
    return {{"session_id", session_id}, {"seq", seq}, {"kind", to_string(kind)}, {"at", at}, {"payload", payload}};
}

SessionEvent SessionEvent::from_json(const json& j) {
    try {
        SessionEvent e;
        e.session_id = j.at("session_id").get<std::string>();
        e.seq = j.at("seq").get<std::uint64_t>();
        e.kind = event_kind_from_string(j.at("kind").get<std::string>());
        e.at = j.at("at").get<std::int64_t>();
        e.payload = j.at("payload");
        if (!e.payload.is_object()) throw ParseError("event payload must be an object");
        return e;
    } catch (const json::exception& ex) {
        throw ParseError(std::string("malformed event: ") + ex.what());
    }
}

void validate_rating(const HintRating& rating) {
    auto check = [](int v, const char* name) {
        if (v < 1 || v > 5) {
            throw ValidationError(std::string("rating '") + name + "' must be an integer from 1 to 5");
        }
    };
    check(rating.clear, "clear");
    check(rating.fits, "fits");
    check(rating.helpful, "helpful");
}

void validate_alias(const std::string& alias) {
    if (alias.empty() || alias.size() > 32) throw ValidationError("participant_alias must be 1-32 characters");
    for (unsigned char c : alias) {
        if (!(std::isalnum(c) || c == '_' || c == '-')) {
            throw ValidationError("participant_alias may only contain letters, digits, '_' and '-'");
        }
    }
}

json session_to_json(const Session& s) {
    return {{"session_id", s.session_id},
            {"participant_alias", s.participant_alias},
            {"exercise_id", s.exercise_id},
            {"started_at", s.started_at}};
}

json hint_to_json(const Hint& h) {
    return {{"hint_id", h.hint_id},   {"session_id", h.session_id}, {"text", h.text},
            {"model_id", h.model_id}, {"created_at", h.created_at}};
}

// ---------------------------------------------------------------------------

HintService::HintService(std::vector<Exercise> catalog, std::shared_ptr<const LlmClient> llm, ServiceOptions options)
    : catalog_(std::move(catalog)), llm_(std::move(llm)), options_(std::move(options)) {
    if (!llm_) throw ConfigError("hint service needs an LLM client");
    if (options_.data_dir.empty()) throw ConfigError("hint service needs a data directory");
    if (!options_.clock) options_.clock = [] { return now_ms(); };
    alias_state_ = options_.alias_seed ? options_.alias_seed : static_cast<std::uint64_t>(now_ms());
    std::error_code ec;
    fs::create_directories(options_.data_dir / "sessions", ec);
    if (ec) throw ConfigError("cannot create data directory " + options_.data_dir.string() + ": " + ec.message());
    replay_directory();
}

fs::path HintService::session_file(const std::string& session_id) const {
    return options_.data_dir / "sessions" / (session_id + ".jsonl");
}

void HintService::replay_directory() {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(options_.data_dir / "sessions")) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::string content = read_file(file);
        std::size_t line_no = 0;
        for (const auto& line : split_lines(content)) {
            ++line_no;
            if (trim_view(line).empty()) continue;
            try {
                SessionEvent e = SessionEvent::from_json(json::parse(line));
                if (e.session_id != file.stem().string()) throw ParseError("event belongs to another session");
                apply(e, true);
            } catch (const json::exception& ex) {
                throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + ex.what());
            } catch (const Error& ex) {
                throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + ex.what());
            }
        }
    }
}

// Folds one event into the in-memory state. Events read from disk are
// checked for ordering and referential integrity.
void HintService::apply(const SessionEvent& e, bool from_disk) {
    auto it = sessions_.find(e.session_id);
    if (e.kind == EventKind::SessionStarted) {
        if (it != sessions_.end()) throw ParseError("session started twice");
        if (e.seq != 0) throw ParseError("session_started must be the first event");
        SessionState st;
        st.session = {e.session_id, e.payload.at("participant_alias").get<std::string>(),
                      e.payload.at("exercise_id").get<std::string>(), e.at};
        st.events.push_back(e);
        sessions_.emplace(e.session_id, std::move(st));
        return;
    }
    if (it == sessions_.end()) throw ParseError("event before session_started");
    SessionState& st = it->second;
    if (from_disk) {
        if (e.seq != st.events.size()) throw ParseError("event sequence gap");
        if (e.at <= st.events.back().at) throw ParseError("event timestamps not strictly increasing");
    }
    switch (e.kind) {
    case EventKind::HintIssued: {
        Hint h;
        h.hint_id = e.payload.at("hint_id").get<std::string>();
        h.session_id = e.session_id;
        h.code_snapshot = e.payload.at("code_snapshot").get<std::string>();
        h.prompt = prompt_from_json(e.payload.at("prompt"));
        h.text = e.payload.at("text").get<std::string>();
        h.model_id = e.payload.at("model_id").get<std::string>();
        h.latency_ms = e.payload.at("latency_ms").get<std::int64_t>();
        h.created_at = e.at;
        if (hints_.count(h.hint_id)) throw ParseError("duplicate hint id " + h.hint_id);
        st.hint_ids.push_back(h.hint_id);
        hints_.emplace(h.hint_id, std::move(h));
        break;
    }
    case EventKind::HintRated: {
        HintRating r;
        r.hint_id = e.payload.at("hint_id").get<std::string>();
        r.clear = e.payload.at("clear").get<int>();
        r.fits = e.payload.at("fits").get<int>();
        r.helpful = e.payload.at("helpful").get<int>();
        if (!e.payload.at("comment").is_null()) r.comment = e.payload.at("comment").get<std::string>();
        auto h = hints_.find(r.hint_id);
        if (h == hints_.end() || h->second.session_id != e.session_id) {
            throw ParseError("rating for unknown hint " + r.hint_id);
        }
        if (ratings_.count(r.hint_id)) throw ParseError("hint rated twice: " + r.hint_id);
        validate_rating(r);
        ratings_.emplace(r.hint_id, std::move(r));
        break;
    }
    case EventKind::SnapshotLogged:
    case EventKind::SolutionChecked:
    case EventKind::SessionStarted:
        break;
    }
    st.events.push_back(e);
}

SessionEvent HintService::append(SessionState& st, EventKind kind, json payload) {
    SessionEvent e;
    e.session_id = st.session.session_id;
    e.seq = st.events.size();
    e.kind = kind;
    e.at = options_.clock();
    if (!st.events.empty() && e.at <= st.events.back().at) e.at = st.events.back().at + 1;
    e.payload = std::move(payload);
    append_line(session_file(e.session_id), e.to_json().dump());
    apply(e, false);
    return e;
}

HintService::SessionState& HintService::session_or_throw(const std::string& session_id) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
    return it->second;
}

const Exercise& HintService::exercise_or_throw(const std::string& exercise_id) const {
    for (const auto& e : catalog_) {
        if (e.id == exercise_id) return e;
    }
    throw NotFoundError("unknown exercise '" + exercise_id + "'");
}

std::string HintService::random_alias() {
    // splitmix64, six digits
    std::uint64_t z = (alias_state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return std::to_string(100000 + z % 900000);
}

json HintService::list_exercises() const {
    json out = json::array();
    for (const auto& e : catalog_) {
        out.push_back({{"id", e.id}, {"title", e.title}, {"description", e.description},
                       {"starter_code", e.starter_code}});
    }
    return out;
}

Session HintService::start_session(const std::string& exercise_id, const std::string& participant_alias) {
    exercise_or_throw(exercise_id);
    if (!participant_alias.empty()) validate_alias(participant_alias);
    std::lock_guard lock(mutex_);
    std::string alias = participant_alias.empty() ? random_alias() : participant_alias;
    std::string id = make_uuid();
    while (sessions_.count(id)) id = make_uuid();

    SessionState st;
    st.session = {id, alias, exercise_id, 0};
    SessionEvent e;
    e.session_id = id;
    e.seq = 0;
    e.kind = EventKind::SessionStarted;
    e.at = options_.clock();
    e.payload = {{"participant_alias", alias}, {"exercise_id", exercise_id}};
    append_line(session_file(id), e.to_json().dump());
    apply(e, false);
    return sessions_.at(id).session;
}

Hint HintService::request_hint(const std::string& session_id, const std::string& source) {
    std::string exercise_id;
    {
        std::lock_guard lock(mutex_);
        SessionState& st = session_or_throw(session_id);
        exercise_id = st.session.exercise_id;
        append(st, EventKind::SnapshotLogged, {{"reason", "hint"}, {"source", source}});
    }
    const Exercise& exercise = exercise_or_throw(exercise_id);
    Prompt prompt = render_prompt(default_spec(), exercise, source);

    CompletionRequest request;
    request.temperature = prompt.spec.temperature;
    request.prompt_text = prompt.text;
    CompletionResponse response = llm_->complete(request);  // outside the lock; calls may overlap

    std::lock_guard lock(mutex_);
    SessionState& st = session_or_throw(session_id);
    std::string hint_id = make_uuid();
    while (hints_.count(hint_id)) hint_id = make_uuid();
    append(st, EventKind::HintIssued,
           {{"hint_id", hint_id},
            {"code_snapshot", source},
            {"prompt", prompt_to_json(prompt)},
            {"text", response.text},
            {"model_id", response.model_id},
            {"latency_ms", response.latency_ms}});
    return hints_.at(hint_id);
}

void HintService::rate_hint(const HintRating& rating) {
    validate_rating(rating);
    std::lock_guard lock(mutex_);
    auto h = hints_.find(rating.hint_id);
    if (h == hints_.end()) throw NotFoundError("unknown hint '" + rating.hint_id + "'");
    if (ratings_.count(rating.hint_id)) throw ConflictError("hint '" + rating.hint_id + "' is already rated");
    append(session_or_throw(h->second.session_id), EventKind::HintRated, rating_payload(rating));
}

CheckResult HintService::check(const std::string& session_id, const std::string& source) {
    std::string exercise_id;
    {
        std::lock_guard lock(mutex_);
        SessionState& st = session_or_throw(session_id);
        exercise_id = st.session.exercise_id;
        append(st, EventKind::SnapshotLogged, {{"reason", "check"}, {"source", source}});
    }
    const Exercise& exercise = exercise_or_throw(exercise_id);
    CheckResult result = check_solution(exercise, source, options_.runner);

    json summary = json::array();
    for (const auto& t : result.per_test) {
        summary.push_back({{"name", t.name}, {"passed", t.passed}, {"timed_out", t.timed_out}});
    }
    std::lock_guard lock(mutex_);
    append(session_or_throw(session_id), EventKind::SolutionChecked,
           {{"passed", result.passed}, {"per_test", summary}});
    return result;
}

std::string HintService::export_events(const std::optional<std::string>& session_id) const {
    std::lock_guard lock(mutex_);
    std::vector<const SessionState*> selected;
    if (session_id) {
        auto it = sessions_.find(*session_id);
        if (it == sessions_.end()) throw NotFoundError("unknown session '" + *session_id + "'");
        selected.push_back(&it->second);
    } else {
        for (const auto& [id, st] : sessions_) selected.push_back(&st);
        std::stable_sort(selected.begin(), selected.end(), [](const SessionState* a, const SessionState* b) {
            return a->session.started_at < b->session.started_at;
        });
    }
    std::string out;
    for (const auto* st : selected) {
        for (const auto& e : st->events) {
            out += e.to_json().dump();
            out.push_back('\n');
        }
    }
    return out;
}

json HintService::state_json() const {
    std::lock_guard lock(mutex_);
    json sessions = json::array();
    for (const auto& [id, st] : sessions_) {
        json s = session_to_json(st.session);
        s["hint_ids"] = st.hint_ids;
        s["event_count"] = st.events.size();
        sessions.push_back(std::move(s));
    }
    json hints = json::array();
    for (const auto& [id, h] : hints_) {
        json j = hint_to_json(h);
        j["code_snapshot"] = h.code_snapshot;
        j["prompt"] = prompt_to_json(h.prompt);
        j["latency_ms"] = h.latency_ms;
        hints.push_back(std::move(j));
    }
    json ratings = json::array();
    for (const auto& [id, r] : ratings_) ratings.push_back(rating_payload(r));
    return {{"sessions", sessions}, {"hints", hints}, {"ratings", ratings}};
}

std::size_t HintService::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::optional<Hint> HintService::find_hint(const std::string& hint_id) const {
    std::lock_guard lock(mutex_);
    auto it = hints_.find(hint_id);
    if (it == hints_.end()) return std::nullopt;
    return it->second;
}

std::optional<HintRating> HintService::find_rating(const std::string& hint_id) const {
    std::lock_guard lock(mutex_);
    auto it = ratings_.find(hint_id);
    if (it == ratings_.end()) return std::nullopt;
    return it->second;
}

} // namespace stap
