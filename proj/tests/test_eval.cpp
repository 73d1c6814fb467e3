#include "stap/error.hpp"
#include "stap/experiment.hpp"
#include "stap/hint_service.hpp"
#include "stap/kappa.hpp"
#include "stap/process.hpp"
#include "stap/ranking.hpp"
#include "stap/ratings.hpp"
#include "stap/rubric.hpp"
#include "stap/sentences.hpp"
#include "stap/util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace stap;
using nlohmann::json;

// ---------------------------------------------------------------------------
// sentences

TEST(Sentences, Basic) {
    EXPECT_EQ(count_sentences(""), 0);
    EXPECT_EQ(count_sentences("   \n"), 0);
    EXPECT_EQ(count_sentences("Use a loop."), 1);
    EXPECT_EQ(count_sentences("Good start! Now handle the last clump."), 2);
    EXPECT_EQ(count_sentences("Is it sorted? Check it. Then print"), 3);
    EXPECT_EQ(count_sentences("Wait... what about zero?"), 2);  // an ellipsis before a space ends one
}

TEST(Sentences, CodeAndDecimals) {
    EXPECT_EQ(count_sentences("Check `v1.count` here."), 1);
    EXPECT_EQ(count_sentences("Use `x = 1. ` then stop."), 1);
    EXPECT_EQ(count_sentences("The average is 3.5 here."), 1);
    EXPECT_EQ(count_sentences("He said \"stop.\" Then go."), 2);
    EXPECT_EQ(count_sentences("(Look again.) Fine."), 2);
}

// ---------------------------------------------------------------------------
// kappa

namespace {

// Textbook formula in floating point, used as an independent check.
double kappa_reference(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string, double> ca, cb;
    double agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1;
        cb[b[i]] += 1;
        if (a[i] == b[i]) agree += 1;
    }
    double n = static_cast<double>(a.size());
    double po = agree / n, pe = 0;
    for (const auto& [k, v] : ca) pe += (v / n) * (cb.count(k) ? cb[k] / n : 0.0);
    return (po - pe) / (1 - pe);
}

} // namespace

TEST(Kappa, KnownValues) {
    auto r = cohens_kappa({"x", "y", "x"}, {"x", "y", "x"});
    EXPECT_DOUBLE_EQ(r.kappa, 1.0);
    EXPECT_FALSE(r.degenerate);

    r = cohens_kappa({"x", "x", "y", "y"}, {"x", "y", "x", "y"});
    EXPECT_DOUBLE_EQ(r.observed, 0.5);
    EXPECT_DOUBLE_EQ(r.expected, 0.5);
    EXPECT_DOUBLE_EQ(r.kappa, 0.0);

    // 20 items: 15 agree; a has 10 yes, b has 9 yes
    std::vector<std::string> a, b;
    for (int i = 0; i < 8; ++i) { a.push_back("y"); b.push_back("y"); }
    for (int i = 0; i < 7; ++i) { a.push_back("n"); b.push_back("n"); }
    for (int i = 0; i < 2; ++i) { a.push_back("y"); b.push_back("n"); }
    for (int i = 0; i < 3; ++i) { a.push_back("n"); b.push_back("y"); }
    r = cohens_kappa(a, b);
    EXPECT_EQ(r.agreements, 15u);
    // p_e = (10*11 + 10*9)/400 = 0.5
    EXPECT_NEAR(r.kappa, 0.5, 1e-12);
}

TEST(Kappa, DegenerateAndUndefined) {
    auto r = cohens_kappa({"t", "t"}, {"t", "t"});
    EXPECT_TRUE(r.degenerate);
    EXPECT_FALSE(r.undefined);
    EXPECT_DOUBLE_EQ(r.kappa, 1.0);

    // one rater constant, other not: p_e < 1, kappa defined (0)
    r = cohens_kappa({"t", "t"}, {"t", "f"});
    EXPECT_FALSE(r.undefined);
    EXPECT_DOUBLE_EQ(r.kappa, 0.0);
}

TEST(Kappa, Errors) {
    EXPECT_THROW(cohens_kappa({"a"}, {"a", "b"}), ValidationError);
    EXPECT_THROW(cohens_kappa({}, {}), ValidationError);
}

TEST(Kappa, PropertiesOverRandomPairs) {
    std::mt19937 rng(7);
    const std::vector<std::string> cats = {"a", "b", "c", "d"};
    for (int round = 0; round < 300; ++round) {
        std::size_t n = 1 + rng() % 40;
        std::size_t k = 1 + rng() % cats.size();
        std::vector<std::string> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = cats[rng() % k];
            b[i] = rng() % 3 == 0 ? a[i] : cats[rng() % k];
        }
        auto ab = cohens_kappa(a, b);
        auto ba = cohens_kappa(b, a);
        EXPECT_EQ(ab.undefined, ba.undefined);
        if (ab.undefined || ab.degenerate) continue;
        EXPECT_DOUBLE_EQ(ab.kappa, ba.kappa);
        EXPECT_LE(ab.kappa, 1.0 + 1e-12);
        EXPECT_GE(ab.kappa, -1.0 - 1e-12);
        EXPECT_NEAR(ab.kappa, kappa_reference(a, b), 1e-9);

        // item order does not matter
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<std::string> pa, pb;
        for (auto i : idx) { pa.push_back(a[i]); pb.push_back(b[i]); }
        EXPECT_DOUBLE_EQ(cohens_kappa(pa, pb).kappa, ab.kappa);

        // relabelling categories does not matter
        std::vector<std::string> ra, rb;
        for (auto& s : a) ra.push_back("z" + s);
        for (auto& s : b) rb.push_back("z" + s);
        EXPECT_DOUBLE_EQ(cohens_kappa(ra, rb).kappa, ab.kappa);
    }
}

TEST(Kappa, Json) {
    auto j = kappa_report_to_json(cohens_kappa({"x", "y"}, {"x", "y"}, "tone"));
    EXPECT_EQ(j["criterion"], "tone");
    EXPECT_EQ(j["n"], 2);
}

// ---------------------------------------------------------------------------
// ranking

namespace {

// Ten entries whose ranks for each prompt sum to the given totals.
RankingSheet sheet_with_sums(const std::string& exercise, const std::map<std::string, int>& sums) {
    RankingSheet s;
    s.exercise_id = exercise;
    for (int i = 0; i < 10; ++i) s.entries.push_back({"p" + std::to_string(i), {}});
    for (const auto& [prompt, sum] : sums) {
        int extra = sum - 10;  // start at rank 1 everywhere
        for (int i = 0; i < 10; ++i) {
            int r = 1 + std::min(2, extra);
            extra -= r - 1;
            s.entries[static_cast<std::size_t>(i)].ranks[prompt] = r;
        }
    }
    return s;
}

} // namespace

TEST(Ranking, SecondRoundTotals) {
    auto result = aggregate_ranking({sheet_with_sums("brackets", {{"ii", 20}, {"iv", 27}, {"v", 16}}),
                                     sheet_with_sums("pies", {{"ii", 25}, {"iv", 19}, {"v", 17}})});
    EXPECT_EQ(result.scores.at("ii").total, 45);
    EXPECT_EQ(result.scores.at("iv").total, 46);
    EXPECT_EQ(result.scores.at("v").total, 33);
    EXPECT_EQ(result.scores.at("v").per_exercise.at("brackets"), 16);
    ASSERT_EQ(result.best, std::vector<std::string>{"v"});
    EXPECT_TRUE(result.scores.at("v").winner);
    EXPECT_FALSE(result.tie());
}

TEST(Ranking, TieHasNoWinner) {
    auto result = aggregate_ranking({sheet_with_sums("pies", {{"a", 15}, {"b", 15}, {"c", 25}})});
    EXPECT_TRUE(result.tie());
    EXPECT_EQ(result.best.size(), 2u);
    EXPECT_FALSE(result.scores.at("a").winner);
    EXPECT_FALSE(result.scores.at("b").winner);
}

TEST(Ranking, Validation) {
    RankingSheet s{"pies", {{"p1", {{"a", 1}, {"b", 4}}}}};
    EXPECT_THROW(aggregate_ranking({s}), ValidationError);
    RankingSheet partial{"pies", {{"p1", {{"a", 1}, {"b", 2}}}, {"p2", {{"a", 1}}}}};
    EXPECT_THROW(aggregate_ranking({partial}), ValidationError);
    RankingSheet x{"pies", {{"p1", {{"a", 1}, {"b", 2}}}}};
    RankingSheet y{"clumps", {{"p1", {{"a", 1}, {"c", 2}}}}};
    EXPECT_THROW(aggregate_ranking({x, y}), ValidationError);
}

TEST(Ranking, SheetFilesRoundTrip) {
    TempDir dir;
    auto s = sheet_with_sums("clumps", {{"ii", 20}, {"v", 16}});
    write_file(dir.path() / "b.json", ranking_sheet_to_json(s).dump());
    write_file(dir.path() / "a.json", ranking_sheet_to_json(sheet_with_sums("pies", {{"ii", 12}, {"v", 18}})).dump());
    write_file(dir.path() / "notes.txt", "ignored");
    auto sheets = load_ranking_sheets(dir.path());
    ASSERT_EQ(sheets.size(), 2u);
    EXPECT_EQ(sheets[0].exercise_id, "pies");
    EXPECT_EQ(sheets[1].entries[3].ranks, s.entries[3].ranks);
}

// ---------------------------------------------------------------------------
// rubric

namespace {

json good_entry(const std::string& hint_id) {
    return {{"hint_id", hint_id},         {"feedback_type", "mistakes"}, {"information", {"tip"}},
            {"level_of_detail", "high_level"}, {"personalised", true},   {"appropriate", true},
            {"specific", false},          {"misleading", false},         {"tone", "neutral"},
            {"length_sentences", 2}};
}

} // namespace

TEST(Rubric, EachCriterionValidated) {
    EXPECT_NO_THROW(annotation_from_json(good_entry("h1")));
    const std::map<std::string, json> illegal = {
        {"feedback_type", "vague"},   {"information", {"praise"}}, {"level_of_detail", "medium"},
        {"personalised", "yes"},      {"appropriate", 1},          {"specific", nullptr},
        {"misleading", "no"},         {"tone", "angry"},           {"length_sentences", 0}};
    ASSERT_EQ(illegal.size(), rubric_criteria().size());
    for (const auto& criterion : rubric_criteria()) {
        json bad = good_entry("h1");
        bad[criterion] = illegal.at(criterion);
        try {
            annotation_from_json(bad);
            ADD_FAILURE() << criterion << " accepted an illegal value";
        } catch (const ValidationError& e) {
            EXPECT_NE(std::string(e.what()).find("'" + criterion + "'"), std::string::npos) << e.what();
        }
        json missing = good_entry("h1");
        missing.erase(criterion);
        try {
            annotation_from_json(missing);
            ADD_FAILURE() << criterion << " missing was accepted";
        } catch (const ValidationError& e) {
            EXPECT_NE(std::string(e.what()).find("is missing"), std::string::npos) << e.what();
        }
    }
    json extra = good_entry("h1");
    extra["mood"] = "ok";
    EXPECT_THROW(annotation_from_json(extra), ValidationError);
}

TEST(Rubric, Combinations) {
    EXPECT_EQ(information_combination({}), "none");
    EXPECT_EQ(information_combination({"tip"}), "T");
    EXPECT_EQ(information_combination({"tip", "compliment"}), "C&T");
    EXPECT_EQ(information_combination({"explanation", "compliment", "tip"}), "C&T&E");
}

TEST(Rubric, AnnotateAndReport) {
    AnnotationStore store;
    std::set<std::string> known = {"h1", "h2"};
    json second = good_entry("h2");
    second["information"] = {"compliment", "tip"};
    second["tone"] = "friendly";
    annotate(store, known, "alice", good_entry("h1").dump() + "\n\n" + second.dump() + "\n");
    ASSERT_EQ(store.size(), 2u);
    EXPECT_EQ(store.all()[0].annotator_id, "alice");

    EXPECT_THROW(annotate(store, known, "alice", good_entry("h1").dump()), ConflictError);
    EXPECT_NO_THROW(annotate(store, known, "bob", good_entry("h1").dump()));
    EXPECT_THROW(annotate(store, known, "bob", good_entry("h9").dump()), ValidationError);
    json other = good_entry("h2");
    other["annotator_id"] = "carol";
    EXPECT_THROW(annotate(store, known, "bob", other.dump()), ValidationError);

    auto report = rubric_report(store.by_annotator("alice"));
    EXPECT_EQ(report.n, 2u);
    EXPECT_EQ(report.information_combinations.at("T"), 1u);
    EXPECT_EQ(report.information_combinations.at("C&T"), 1u);
    EXPECT_EQ(report.tables.at("tone").at("friendly"), 1u);
    EXPECT_EQ(report.tables.at("personalised").at("true"), 2u);
    EXPECT_NE(rubric_report_csv(report).find("information,C&T,1"), std::string::npos);

    auto round = annotations_from_jsonl(annotations_to_jsonl(store.all()));
    ASSERT_EQ(round.size(), 3u);
    EXPECT_EQ(round[1].information, (std::vector<std::string>{"compliment", "tip"}));
}

TEST(Rubric, EmptyReport) {
    auto r = rubric_report({});
    EXPECT_EQ(r.n, 0u);
    EXPECT_TRUE(r.tables.empty());
    EXPECT_EQ(rubric_report_to_json(r)["n"], 0);
}

TEST(Rubric, HintIdsFromBothFileKinds) {
    std::string records = R"({"hint_id":"a1","status":"ok"})" "\n" R"({"hint_id":"a2"})" "\n";
    std::string events = R"({"session_id":"s","seq":2,"kind":"hint_issued","at":5,"payload":{"hint_id":"b1"}})" "\n"
                         R"({"session_id":"s","seq":1,"kind":"session_started","at":4,"payload":{}})" "\n";
    EXPECT_EQ(hint_ids_from_jsonl(records), (std::set<std::string>{"a1", "a2"}));
    EXPECT_EQ(hint_ids_from_jsonl(events), (std::set<std::string>{"b1"}));
}

// ---------------------------------------------------------------------------
// ratings

namespace {

std::string run_sessions(const std::vector<int>& hints_per_session, int score) {
    TempDir dir;
    ServiceOptions o;
    o.data_dir = dir.path();
    HintService svc(builtin_exercises(), std::make_shared<const LlmClient>(make_mock()), o);
    for (std::size_t s = 0; s < hints_per_session.size(); ++s) {
        auto session = svc.start_session("clumps", "p" + std::to_string(s));
        for (int i = 0; i < hints_per_session[s]; ++i) {
            auto h = svc.request_hint(session.session_id, "n = " + std::to_string(i));
            if (score > 0) svc.rate_hint({h.hint_id, score, 1 + i % 5, 1 + (i + 2) % 5, {}});
        }
    }
    return svc.export_events();
}

} // namespace

TEST(Ratings, CountsAcrossSessions) {
    auto report = rating_report(run_sessions({11, 20, 17}, 4));
    EXPECT_EQ(report.n, 48u);
    EXPECT_EQ(report.clear.bins[3], 48u);
    EXPECT_EQ(report.fits.total(), 48u);
    EXPECT_EQ(report.helpful.total(), 48u);
    ASSERT_EQ(report.sessions.size(), 3u);
    std::vector<std::size_t> counts;
    for (const auto& [id, c] : report.sessions) {
        EXPECT_EQ(c.hints, c.rated);
        counts.push_back(c.hints);
    }
    std::sort(counts.begin(), counts.end());
    EXPECT_EQ(counts, (std::vector<std::size_t>{11, 17, 20}));

    std::string csv = rating_histogram_csv(report);
    EXPECT_NE(csv.find("clear,0,0,0,48,0,48"), std::string::npos) << csv;
}

TEST(Ratings, UnratedHintsAndFiles) {
    auto report = rating_report(run_sessions({3}, 0));
    EXPECT_EQ(report.n, 0u);
    EXPECT_EQ(report.sessions.begin()->second.hints, 3u);
    TempDir out;
    write_rating_report(report, out.path());
    for (const char* f : {"ratings.csv", "ratings_plot.csv", "hints_per_session.csv", "ratings.json"}) {
        EXPECT_TRUE(std::filesystem::exists(out.path() / f)) << f;
    }
    EXPECT_NE(read_file(out.path() / "hints_per_session.csv").find(",p0,3,0"), std::string::npos);
}

TEST(Ratings, MalformedLine) {
    EXPECT_THROW(rating_report("{\"nope\":1}\n"), ParseError);
    EXPECT_THROW(rating_report("not json\n"), ParseError);
}

// ---------------------------------------------------------------------------
// experiment

namespace {

StepSequence make_sequence(const std::string& student, std::size_t steps, const std::string& marker = {}) {
    StepSequence seq;
    seq.student_id = student;
    seq.exercise_id = "clumps";
    for (std::size_t i = 0; i < steps; ++i) {
        std::string src = "n = int(input())\n# step " + std::to_string(i) + "\n";
        if (i == 1 && !marker.empty()) src += marker + "\n";
        seq.steps.push_back({i * 3, static_cast<std::int64_t>(1000 + i), src});
    }
    return seq;
}

ExperimentManifest matrix_manifest(int samples) {
    ExperimentManifest m;
    m.exercise_ids = {"clumps"};
    m.prompt_specs = enumerate_matrix({Instruction::I, Instruction::II, Instruction::III}, all_attribute_combos());
    m.samples_per_state = samples;
    m.model_id = "test-model";
    return m;
}

struct MarkerFailingBackend : ChatBackend {
    CompletionResponse complete(const CompletionRequest& r) override {
        if (r.prompt_text.find("# FAIL") != std::string::npos) throw TransportError("boom");
        return MockBackend(1).complete(r);
    }
    std::string name() const override { return "marker"; }
};

struct NoKeyBackend : ChatBackend {
    CompletionResponse complete(const CompletionRequest&) override { throw CredentialError("no key"); }
    std::string name() const override { return "nokey"; }
};

} // namespace

TEST(Experiment, RecordCountsAndDeterminism) {
    LlmClient client(make_mock(3));
    auto manifest = matrix_manifest(1);
    ASSERT_EQ(manifest.prompt_specs.size(), 12u);
    std::vector<StepSequence> seqs = {make_sequence("s1", 6), make_sequence("s2", 4)};
    auto a = run_experiment(manifest, seqs, builtin_exercises(), client);
    EXPECT_EQ(a.records.size(), 120u);
    EXPECT_EQ(a.ok, 120u);
    EXPECT_EQ(a.failed, 0u);
    auto b = run_experiment(manifest, seqs, builtin_exercises(), client);
    EXPECT_EQ(records_to_jsonl(a.records), records_to_jsonl(b.records));

    std::set<std::string> ids;
    for (const auto& r : a.records) ids.insert(r.hint_id);
    EXPECT_EQ(ids.size(), 120u);
    // nesting order: step, then spec
    EXPECT_EQ(a.records[0].spec, manifest.prompt_specs[0]);
    EXPECT_EQ(a.records[11].spec, manifest.prompt_specs[11]);
    EXPECT_EQ(a.records[12].step_ref.position, 1u);
    EXPECT_EQ(a.records[12].step_ref.step_index, 3u);

    auto two = run_experiment(matrix_manifest(2), {make_sequence("s1", 5)}, builtin_exercises(), client);
    EXPECT_EQ(two.records.size(), 120u);
    auto half = run_experiment(manifest, {make_sequence("s1", 5)}, builtin_exercises(), client);
    EXPECT_EQ(half.records.size(), 60u);
}

TEST(Experiment, EmptySequenceWarns) {
    LlmClient client(make_mock());
    auto r = run_experiment(matrix_manifest(1), {make_sequence("s1", 0), make_sequence("s2", 1)}, builtin_exercises(),
                            client);
    EXPECT_EQ(r.records.size(), 12u);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("s1"), std::string::npos);
}

TEST(Experiment, FailuresAreMarkedAndRunContinues) {
    LlmClient client(std::make_shared<MarkerFailingBackend>());
    auto r = run_experiment(matrix_manifest(1), {make_sequence("s1", 3, "# FAIL")}, builtin_exercises(), client);
    EXPECT_EQ(r.records.size(), 36u);
    EXPECT_EQ(r.failed, 12u);
    EXPECT_EQ(r.ok, 24u);
    EXPECT_EQ(r.failures.size(), 12u);
    for (const auto& rec : r.records) {
        EXPECT_EQ(rec.status == "failed", rec.step_ref.position == 1);
        if (rec.status == "failed") {
            EXPECT_NE(rec.error.find("transport_error"), std::string::npos);
        }
    }
}

TEST(Experiment, MissingCredentialAborts) {
    LlmClient client(std::make_shared<NoKeyBackend>());
    EXPECT_THROW(run_experiment(matrix_manifest(1), {make_sequence("s1", 2)}, builtin_exercises(), client),
                 CredentialError);
}

TEST(Experiment, ManifestValidation) {
    LlmClient client(make_mock());
    auto m = matrix_manifest(0);
    EXPECT_THROW(validate_manifest(m), ValidationError);
    m = matrix_manifest(1);
    m.prompt_specs.clear();
    EXPECT_THROW(validate_manifest(m), ValidationError);
    m = matrix_manifest(1);
    m.exercise_ids = {"pies"};
    EXPECT_THROW(run_experiment(m, {make_sequence("s1", 1)}, builtin_exercises(), client), ValidationError);
}

TEST(Experiment, ManifestAndRecordJson) {
    TempDir dir;
    write_step_sequence(dir.path() / "s1.jsonl", make_sequence("s1", 2));
    auto m = matrix_manifest(1);
    m.step_sequence_paths = {"s1.jsonl"};
    m.output_path = "out.jsonl";
    write_file(dir.path() / "manifest.json", manifest_to_json(m).dump());
    auto loaded = load_manifest(dir.path() / "manifest.json");
    ASSERT_EQ(loaded.step_sequence_paths.size(), 1u);
    EXPECT_EQ(loaded.step_sequence_paths[0], dir.path() / "s1.jsonl");
    EXPECT_EQ(loaded.prompt_specs, m.prompt_specs);

    LlmClient client(make_mock());
    auto r = run_experiment(loaded, builtin_exercises(), client);
    ASSERT_EQ(r.records.size(), 24u);
    auto back = record_from_json(record_to_json(r.records[5]));
    EXPECT_EQ(record_to_json(back), record_to_json(r.records[5]));
    EXPECT_EQ(experiment_summary_json(r)["ok"], 24);
}
