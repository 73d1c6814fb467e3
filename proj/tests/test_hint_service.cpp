#include "stap/error.hpp"
#include "stap/hint_service.hpp"
#include "stap/process.hpp"
#include "stap/util.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace stap;
using nlohmann::json;

namespace {

struct FailingBackend : ChatBackend {
    CompletionResponse complete(const CompletionRequest&) override { throw TransportError("upstream down"); }
    std::string name() const override { return "failing"; }
};

struct Fixture : ::testing::Test {
    TempDir dir;
    std::int64_t tick = 1'000;

    ServiceOptions options() {
        ServiceOptions o;
        o.data_dir = dir.path();
        o.clock = [this] { return tick; };  // frozen clock: ordering must still be strict
        o.alias_seed = 99;
        return o;
    }

    std::unique_ptr<HintService> make(std::shared_ptr<ChatBackend> backend = make_mock()) {
        return std::make_unique<HintService>(builtin_exercises(), std::make_shared<const LlmClient>(backend),
                                             options());
    }

    static std::vector<json> lines(const std::string& jsonl) {
        std::vector<json> out;
        for (const auto& l : split_lines(jsonl)) {
            if (!l.empty()) out.push_back(json::parse(l));
        }
        return out;
    }
};

} // namespace

TEST_F(Fixture, ListExercisesHidesSolutions) {
    auto svc = make();
    auto list = svc->list_exercises();
    ASSERT_EQ(list.size(), 3u);
    for (const auto& e : list) {
        EXPECT_FALSE(e.contains("model_solution"));
        EXPECT_FALSE(e.contains("tests"));
        EXPECT_TRUE(e.contains("starter_code"));
    }
    HintService empty({}, std::make_shared<const LlmClient>(make_mock()), options());
    EXPECT_TRUE(empty.list_exercises().empty());
}

TEST_F(Fixture, StartSession) {
    auto svc = make();
    auto a = svc->start_session("clumps", "p-17");
    auto b = svc->start_session("clumps");
    EXPECT_NE(a.session_id, b.session_id);
    EXPECT_EQ(a.participant_alias, "p-17");
    EXPECT_EQ(b.participant_alias.size(), 6u);
    EXPECT_TRUE(std::all_of(b.participant_alias.begin(), b.participant_alias.end(), ::isdigit));
    EXPECT_THROW(svc->start_session("nope"), NotFoundError);
    EXPECT_THROW(svc->start_session("clumps", "jane.doe@example.org"), ValidationError);
    EXPECT_EQ(svc->session_count(), 2u);
}

TEST_F(Fixture, RequestHintUsesDefaultPromptAndMock) {
    auto svc = make();
    auto s = svc->start_session("clumps", "a1");
    auto h = svc->request_hint(s.session_id, "n = int(input())\n");
    EXPECT_FALSE(h.text.empty());
    EXPECT_EQ(h.code_snapshot, "n = int(input())\n");
    EXPECT_EQ(h.prompt.spec, default_spec());
    EXPECT_EQ(h.model_id, "mock");

    // same text as asking the mock directly with the rendered default prompt
    Exercise clumps = builtin_exercises()[2];
    CompletionRequest req;
    req.prompt_text = render_prompt_text(default_spec(), clumps, "n = int(input())\n");
    req.temperature = 0.5;
    EXPECT_EQ(h.text, MockBackend().complete(req).text);

    auto again = svc->request_hint(s.session_id, "n = int(input())\n");
    EXPECT_NE(again.hint_id, h.hint_id);
    EXPECT_NO_THROW(svc->request_hint(s.session_id, ""));
    EXPECT_THROW(svc->request_hint("missing", "x"), NotFoundError);
}

TEST_F(Fixture, RatingRules) {
    auto svc = make();
    auto s = svc->start_session("pies", "a1");
    auto h = svc->request_hint(s.session_id, "a = int(input())\n");
    svc->rate_hint({h.hint_id, 5, 4, 3, "useful"});
    auto stored = svc->find_rating(h.hint_id);
    ASSERT_TRUE(stored);
    EXPECT_EQ(stored->comment, "useful");
    EXPECT_THROW(svc->rate_hint({h.hint_id, 5, 4, 3, std::nullopt}), ConflictError);
    auto h2 = svc->request_hint(s.session_id, "a = 1\n");
    EXPECT_THROW(svc->rate_hint({h2.hint_id, 0, 4, 3, std::nullopt}), ValidationError);
    EXPECT_THROW(svc->rate_hint({h2.hint_id, 1, 6, 3, std::nullopt}), ValidationError);
    EXPECT_THROW(svc->rate_hint({"no-such-hint", 1, 1, 1, std::nullopt}), NotFoundError);
    EXPECT_FALSE(svc->find_rating(h2.hint_id));
}

TEST_F(Fixture, ExportCountsAndOrder) {
    auto svc = make();
    auto s = svc->start_session("clumps", "a1");
    auto h = svc->request_hint(s.session_id, "x = 1\n");
    svc->rate_hint({h.hint_id, 4, 4, 4, std::nullopt});
    auto ev = lines(svc->export_events(s.session_id));
    ASSERT_EQ(ev.size(), 4u);
    EXPECT_EQ(ev[0]["kind"], "session_started");
    EXPECT_EQ(ev[1]["kind"], "snapshot_logged");
    EXPECT_EQ(ev[2]["kind"], "hint_issued");
    EXPECT_EQ(ev[3]["kind"], "hint_rated");
    EXPECT_EQ(ev[2]["payload"]["prompt"]["text"].get<std::string>().find("Student code:") != std::string::npos, true);
    for (std::size_t i = 1; i < ev.size(); ++i) {
        EXPECT_GT(ev[i]["at"].get<std::int64_t>(), ev[i - 1]["at"].get<std::int64_t>());
        EXPECT_EQ(ev[i]["seq"], i);
    }
    EXPECT_THROW(svc->export_events(std::string("missing")), NotFoundError);
}

TEST_F(Fixture, ExportAllConcatenatesSessionsInStartOrder) {
    auto svc = make();
    tick = 5000;
    auto late = svc->start_session("pies", "b");
    tick = 10;
    auto early = svc->start_session("pies", "a");
    svc->request_hint(early.session_id, "x = 1\n");
    std::string all = svc->export_events();
    EXPECT_EQ(all, svc->export_events(early.session_id) + svc->export_events(late.session_id));
}

TEST_F(Fixture, LogIsAppendOnly) {
    auto svc = make();
    auto s = svc->start_session("clumps", "a1");
    svc->request_hint(s.session_id, "x = 1\n");
    auto file = dir.path() / "sessions" / (s.session_id + ".jsonl");
    std::string before = read_file(file);
    auto h = svc->request_hint(s.session_id, "x = 2\n");
    svc->rate_hint({h.hint_id, 3, 3, 3, std::nullopt});
    std::string after = read_file(file);
    EXPECT_EQ(after.substr(0, before.size()), before);
    EXPECT_GT(after.size(), before.size());
}

TEST_F(Fixture, ReplayReconstructsState) {
    std::string exported;
    json state;
    {
        auto svc = make();
        for (int k = 0; k < 3; ++k) {
            auto s = svc->start_session(k == 0 ? "pies" : "clumps");
            for (int i = 0; i < 4; ++i) {
                ++tick;
                auto h = svc->request_hint(s.session_id, "v = " + std::to_string(i) + "\n");
                if (i % 2 == 0) svc->rate_hint({h.hint_id, 1 + i, 2, 5, i ? std::optional<std::string>("c") : std::nullopt});
            }
        }
        exported = svc->export_events();
        state = svc->state_json();
    }
    auto replayed = make();
    EXPECT_EQ(replayed->export_events(), exported);
    EXPECT_EQ(replayed->state_json(), state);
    EXPECT_EQ(replayed->session_count(), 3u);
}

TEST_F(Fixture, CorruptLogIsRejected) {
    {
        auto svc = make();
        svc->start_session("pies", "x");
    }
    write_file(dir.path() / "sessions" / "bogus.jsonl",
               R"({"session_id":"bogus","seq":0,"kind":"hint_rated","at":1,"payload":{}})"
               "\n");
    EXPECT_THROW(make(), ParseError);
}

TEST_F(Fixture, TransportFailurePropagates) {
    auto svc = make(std::make_shared<FailingBackend>());
    auto s = svc->start_session("pies", "x");
    EXPECT_THROW(svc->request_hint(s.session_id, "x = 1\n"), TransportError);
    auto ev = lines(svc->export_events(s.session_id));
    ASSERT_EQ(ev.size(), 2u);  // started + snapshot, no hint
    EXPECT_EQ(ev[1]["kind"], "snapshot_logged");
}

TEST_F(Fixture, CheckLogsSummary) {
    if (!find_executable("python3")) GTEST_SKIP() << "python3 not available";
    auto svc = make();
    auto s = svc->start_session("pies", "x");
    auto good = svc->check(s.session_id, *builtin_exercises()[0].model_solution);
    EXPECT_TRUE(good.passed);
    auto bad = svc->check(s.session_id, "print(0, 0)\n");
    EXPECT_FALSE(bad.passed);
    auto ev = lines(svc->export_events(s.session_id));
    ASSERT_EQ(ev.size(), 5u);
    EXPECT_EQ(ev[2]["kind"], "solution_checked");
    EXPECT_EQ(ev[2]["payload"]["passed"], true);
    EXPECT_EQ(ev[4]["payload"]["passed"], false);
    EXPECT_FALSE(ev[4]["payload"]["per_test"][0].contains("actual_stdout"));
}

TEST_F(Fixture, ConcurrentSessions) {
    auto svc = make();
    std::vector<std::string> ids;
    for (int i = 0; i < 4; ++i) ids.push_back(svc->start_session("clumps").session_id);
    std::vector<std::thread> threads;
    for (const auto& id : ids) {
        threads.emplace_back([&, id] {
            for (int i = 0; i < 10; ++i) {
                auto h = svc->request_hint(id, "x = " + std::to_string(i) + "\n");
                svc->rate_hint({h.hint_id, 3, 3, 3, std::nullopt});
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& id : ids) {
        auto ev = lines(svc->export_events(id));
        EXPECT_EQ(ev.size(), 31u);
        for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_EQ(ev[i]["seq"], i);
    }
    auto replayed = make();
    EXPECT_EQ(replayed->export_events(), svc->export_events());
}
