#include "stap/error.hpp"
#include "stap/process.hpp"
#include "stap/python_syntax.hpp"
#include "stap/snapshot.hpp"
#include "stap/util.hpp"

#include "keystroke_gen.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace stap;

namespace {

std::vector<Snapshot> snaps(const std::vector<std::string>& sources) {
    std::vector<Snapshot> out;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        out.push_back({i, static_cast<std::int64_t>(1000 + i * 10), sources[i]});
    }
    return out;
}

std::vector<std::string> sources_of(const std::vector<Snapshot>& s) {
    std::vector<std::string> out;
    for (const auto& x : s) out.push_back(x.source);
    return out;
}

// Independent oracle: consecutive states differ in exactly one common line.
bool single_line_edit(const std::string& a, const std::string& b) {
    auto la = split_lines(a), lb = split_lines(b);
    if (la.size() != lb.size()) return false;
    int diffs = 0;
    for (std::size_t i = 0; i < la.size(); ++i) diffs += la[i] != lb[i];
    return diffs == 1;
}

const EmbeddedPythonChecker checker;

} // namespace

// --- ingestion -------------------------------------------------------------

TEST(Ingest, CsvThreeRows) {
    auto s = parse_raw_log("index,timestamp,source\n0,100,x = 1\n1,110,x = 12\n2,120,\"x = 12\nprint(x)\"\n", LogFormat::Csv);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[2].source, "x = 12\nprint(x)");
    EXPECT_EQ(s[1].timestamp, 110);
}

TEST(Ingest, CsvOutOfOrderIsSorted) {
    auto s = parse_raw_log("index,timestamp,source\n2,120,c\n0,100,a\n1,110,b\n", LogFormat::Csv);
    EXPECT_EQ(sources_of(s), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Ingest, CsvBadTimestampNamesRow) {
    try {
        parse_raw_log("index,timestamp,source\n0,100,a\n1,soon,b\n", LogFormat::Csv);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    }
}

TEST(Ingest, MissingColumnIsSchemaError) {
    try {
        parse_raw_log("index,source\n0,a\n", LogFormat::Csv);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("timestamp"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("schema"), std::string::npos) << e.what();
    }
}

TEST(Ingest, CsvQuotingAndCrLf) {
    auto s = parse_raw_log("index,timestamp,source\r\n0,100,\"a = \"\"q\"\"\r\nb = 2\"\r\n", LogFormat::Csv);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].source, "a = \"q\"\nb = 2");
}

TEST(Ingest, Jsonl) {
    auto s = parse_raw_log("{\"index\":1,\"timestamp\":5,\"source\":\"b\"}\n{\"index\":0,\"timestamp\":4,\"source\":\"a\\r\\n\"}\n",
                           LogFormat::Jsonl);
    EXPECT_EQ(sources_of(s), (std::vector<std::string>{"a\n", "b"}));
    EXPECT_THROW(parse_raw_log("{\"index\":0,\"source\":\"a\"}\n", LogFormat::Jsonl), ParseError);
}

TEST(Ingest, RejectsDuplicateIndexAndTimeTravel) {
    EXPECT_THROW(parse_raw_log("index,timestamp,source\n0,100,a\n0,101,b\n", LogFormat::Csv), ParseError);
    EXPECT_THROW(parse_raw_log("index,timestamp,source\n0,100,a\n1,90,b\n", LogFormat::Csv), ParseError);
}

TEST(Ingest, FromFile) {
    TempDir dir;
    write_file(dir.path() / "log.csv", "index,timestamp,source\n0,1,a\n");
    EXPECT_EQ(ingest_raw_log(dir.path() / "log.csv", LogFormat::Csv).size(), 1u);
    EXPECT_THROW(ingest_raw_log(dir.path() / "missing.csv", LogFormat::Csv), ParseError);
}

// --- dedup -----------------------------------------------------------------

TEST(Dedup, ConsecutiveOnly) {
    EXPECT_EQ(sources_of(dedup(snaps({"A", "A", "B"}))), (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(sources_of(dedup(snaps({"A", "B", "A"}))), (std::vector<std::string>{"A", "B", "A"}));
}

TEST(Dedup, NormalizesTrailingWhitespace) {
    std::vector<Removal> removed;
    auto out = dedup(snaps({"x=1", "x=1  ", "x=1\n\n"}), &removed);
    EXPECT_EQ(sources_of(out), (std::vector<std::string>{"x=1"}));
    EXPECT_EQ(removed.size(), 2u);
    EXPECT_EQ(removed[0].rule, FilterRule::Duplicate);
    EXPECT_EQ(normalize_source("a  \r\nb\t\n\n\n"), "a\nb");
}

TEST(Dedup, NeverDropsFirst) {
    auto out = dedup(snaps({"", "", ""}));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].seq_index, 0u);
}

// --- syntax filter -----------------------------------------------------------

TEST(SyntaxFilter, Examples) {
    std::vector<Removal> removed;
    auto out = filter_syntax_errors(snaps({"x = 1", "x = (", "y = 2"}), checker, &removed);
    EXPECT_EQ(sources_of(out), (std::vector<std::string>{"x = 1", "y = 2"}));
    ASSERT_EQ(removed.size(), 1u);
    EXPECT_EQ(removed[0].seq_index, 1u);
    EXPECT_EQ(removed[0].rule, FilterRule::SyntaxError);
    EXPECT_TRUE(filter_syntax_errors(snaps({"(", "[", "if"}), checker).empty());
    EXPECT_EQ(filter_syntax_errors(snaps({"a = 1", "b = 2"}), checker).size(), 2u);
}

// --- line edits ----------------------------------------------------------------

TEST(LineEdits, GrowingLineKeepsLast) {
    auto in = snaps({"x = 1\ny = 1", "x = 1\ny = 12", "x = 1\ny = 123", "x = 1\ny = 1234"});
    for (std::size_t i = 1; i < in.size(); ++i) ASSERT_TRUE(single_line_edit(in[i - 1].source, in[i].source));
    auto out = collapse_line_edits(in);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].source, "x = 1\ny = 1234");
}

TEST(LineEdits, DifferentLinesBothKept) {
    auto in = snaps({"a = 1\nb = 2", "a = 1\nb = 2\nc = 3"});
    EXPECT_EQ(collapse_line_edits(in).size(), 2u);
    auto one = snaps({"a = 1"});
    EXPECT_EQ(collapse_line_edits(one).size(), 1u);
}

TEST(LineEdits, RunBreaksWhenEditedLineChanges) {
    auto in = snaps({"a = 1\nb = 2", "a = 10\nb = 2", "a = 10\nb = 20"});
    auto out = collapse_line_edits(in);
    // first pair edits line 0, second pair edits line 1
    EXPECT_EQ(sources_of(out), (std::vector<std::string>{"a = 10\nb = 2", "a = 10\nb = 20"}));
}

// --- transient prints ------------------------------------------------------------

TEST(TransientPrints, TraceRemoved) {
    auto in = snaps({"x = 1\n", "x = 1\nprint(x)\n", "x = 1\n", "x = 1\ny = 2\n"});
    auto seq = build_step_sequence(in, "s", "e", checker);
    std::vector<std::string> got = sources_of(seq.steps);
    EXPECT_EQ(got, (std::vector<std::string>{"x = 1\n", "x = 1\ny = 2\n"}));
    std::vector<Removal> removed;
    auto direct = remove_transient_prints(snaps({"x = 1\n", "x = 1\nprint(x)\n", "x = 1\n"}), 5, &removed);
    EXPECT_EQ(direct.size(), 2u);
    ASSERT_EQ(removed.size(), 1u);
    EXPECT_EQ(removed[0].rule, FilterRule::TransientPrint);
}

TEST(TransientPrints, SurvivingPrintKept) {
    auto in = snaps({"x = 1\n", "x = 1\nprint(x)\n", "x = 2\nprint(x)\n"});
    EXPECT_EQ(remove_transient_prints(in).size(), 3u);
    EXPECT_TRUE(remove_transient_prints({}).empty());
}

TEST(TransientPrints, WindowMatters) {
    // The print lingers for 3 later snapshots before disappearing.
    auto in = snaps({"a = 1\n", "a = 1\nprint(a)\n", "a = 2\nprint(a)\n", "a = 3\nprint(a)\n", "a = 4\nprint(a)\n",
                     "a = 4\n"});
    // window 5 also catches the first print; window 1 only the last one
    EXPECT_EQ(remove_transient_prints(in, 5).size(), 4u);
    EXPECT_EQ(remove_transient_prints(in, 1).size(), 5u);
    EXPECT_THROW(remove_transient_prints(in, 0), ValidationError);
}

// --- composition ---------------------------------------------------------------------

TEST(Pipeline, AllInvalid) {
    auto in = snaps({"(", "x =", "def"});
    auto seq = build_step_sequence(in, "s", "e", checker);
    EXPECT_TRUE(seq.steps.empty());
    EXPECT_EQ(seq.provenance.size(), 3u);
}

TEST(Pipeline, CleanSequenceUnchanged) {
    auto in = snaps({"a = 1\n", "a = 1\nb = 2\n", "a = 1\nb = 2\nc = 3\n"});
    auto seq = build_step_sequence(in, "s", "e", checker);
    EXPECT_EQ(seq.steps, in);
    EXPECT_TRUE(seq.provenance.empty());
}

TEST(Pipeline, HundredKeystrokesFiveLines) {
    std::string program = "a = int(input())\nb = int(input())\nc = a + b\nd = c * 2\nprint(d)\n";
    auto raw = stap::testing::synthesize_keystroke_log(program, 11);
    raw.resize(std::min<std::size_t>(raw.size(), 100));
    auto seq = build_step_sequence(raw, "s", "e", checker);
    EXPECT_LE(seq.steps.size(), 100u);
    for (const auto& s : seq.steps) EXPECT_TRUE(checker.is_valid(s.source));
    for (std::size_t i = 1; i < seq.steps.size(); ++i) {
        EXPECT_NE(normalize_source(seq.steps[i - 1].source), normalize_source(seq.steps[i].source));
    }
}

class PipelineProperties : public ::testing::TestWithParam<int> {};

TEST_P(PipelineProperties, Invariants) {
    const int seed = GetParam();
    const auto& programs = stap::testing::sample_programs();
    auto raw = stap::testing::synthesize_keystroke_log(programs[static_cast<std::size_t>(seed) % programs.size()],
                                                 static_cast<std::uint64_t>(seed));
    auto seq = build_step_sequence(raw, "student", "exercise", checker);

    // provenance completeness: every raw index is either kept or removed, once
    std::set<std::uint64_t> kept, removed;
    for (const auto& s : seq.steps) kept.insert(s.seq_index);
    for (const auto& r : seq.provenance) EXPECT_TRUE(removed.insert(r.seq_index).second);
    EXPECT_EQ(kept.size() + removed.size(), raw.size());
    for (auto k : kept) EXPECT_FALSE(removed.count(k));

    // subsequence of the raw log, byte-identical
    std::size_t j = 0;
    for (const auto& s : seq.steps) {
        while (j < raw.size() && !(raw[j] == s)) ++j;
        ASSERT_LT(j, raw.size()) << "step " << s.seq_index << " not found in order";
        ++j;
    }

    for (const auto& s : seq.steps) EXPECT_TRUE(checker.is_valid(s.source));
    for (std::size_t i = 1; i < seq.steps.size(); ++i) {
        EXPECT_NE(normalize_source(seq.steps[i - 1].source), normalize_source(seq.steps[i].source));
    }
    // runs are per line index, so adjacent steps may still edit one (different) line
    EXPECT_EQ(collapse_line_edits(seq.steps).size(), seq.steps.size());

    auto again = build_step_sequence(seq.steps, "student", "exercise", checker);
    EXPECT_EQ(again.steps, seq.steps);
    EXPECT_TRUE(again.provenance.empty());

    // the final program state is what the student ended with
    ASSERT_FALSE(seq.steps.empty());
    EXPECT_EQ(normalize_source(seq.steps.back().source), normalize_source(raw.back().source));
}

INSTANTIATE_TEST_SUITE_P(Synthetic, PipelineProperties, ::testing::Range(1, 21));

TEST(StepSequenceIo, JsonlRoundTrip) {
    auto raw = stap::testing::synthesize_keystroke_log(stap::testing::sample_programs()[1], 3);
    auto seq = build_step_sequence(raw, "st-1", "pies", checker);
    TempDir dir;
    write_step_sequence(dir.path() / "seq.jsonl", seq);
    auto back = read_step_sequence(dir.path() / "seq.jsonl");
    EXPECT_EQ(back.student_id, "st-1");
    EXPECT_EQ(back.exercise_id, "pies");
    EXPECT_EQ(back.steps, seq.steps);
    EXPECT_EQ(back.provenance, seq.provenance);
    EXPECT_EQ(step_sequence_to_jsonl(back), step_sequence_to_jsonl(seq));
    EXPECT_THROW(step_sequence_from_jsonl("{\"type\":\"step\",\"index\":0,\"timestamp\":0,\"source\":\"\"}\n"),
                 ParseError);
}

TEST(FilterRules, StringForms) {
    for (auto r : {FilterRule::Duplicate, FilterRule::SyntaxError, FilterRule::LineEdit, FilterRule::TransientPrint}) {
        EXPECT_EQ(filter_rule_from_string(to_string(r)), r);
    }
    EXPECT_STREQ(to_string(FilterRule::TransientPrint), "transient_print");
}
