// Offline evaluation workflow: cleaning keystroke logs, batch hint
// generation, prompt ranking, rubric annotation, agreement and rating reports.

#include "stap/error.hpp"
#include "stap/exercise.hpp"
#include "stap/experiment.hpp"
#include "stap/kappa.hpp"
#include "stap/llm.hpp"
#include "stap/python_syntax.hpp"
#include "stap/ranking.hpp"
#include "stap/ratings.hpp"
#include "stap/rubric.hpp"
#include "stap/snapshot.hpp"
#include "stap/util.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>
#include <map>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::optional<fs::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

int cmd_preprocess(const std::string& log, const std::string& format, const std::string& student,
                   const std::string& exercise, const std::string& out, const std::string& checker_kind,
                   std::size_t window) {
    auto raw = stap::ingest_raw_log(log, stap::log_format_from_string(format));
    stap::CheckerConfig cfg;
    cfg.kind = checker_kind;
    auto checker = stap::make_syntax_checker(cfg);
    auto seq = stap::build_step_sequence(raw, student, exercise, *checker, {window});
    stap::write_step_sequence(out, seq);
    std::map<std::string, std::size_t> by_rule;
    for (const auto& r : seq.provenance) ++by_rule[stap::to_string(r.rule)];
    std::cout << json{{"raw", raw.size()}, {"steps", seq.steps.size()}, {"removed", by_rule}}.dump() << "\n";
    return 0;
}

int cmd_generate(const std::string& manifest_path, bool live, std::uint64_t seed, const std::string& out_override,
                 const std::string& catalog_dir) {
    auto manifest = stap::load_manifest(manifest_path);
    if (!out_override.empty()) manifest.output_path = out_override;
    if (manifest.output_path.empty()) throw stap::ValidationError("manifest: output_path is required (or pass --out)");
    std::shared_ptr<stap::ChatBackend> backend;
    if (live) {
        backend = std::make_shared<stap::OpenAiBackend>(stap::OpenAiConfig::from_env());
    } else {
        backend = stap::make_mock(seed);
    }
    stap::LlmClient client(backend);
    auto result = stap::run_experiment(manifest, stap::load_catalog(opt_path(catalog_dir)), client);
    stap::write_file(manifest.output_path, stap::records_to_jsonl(result.records));
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << stap::experiment_summary_json(result).dump() << "\n";
    return result.failed ? 3 : 0;
}

int cmd_rank(const std::string& dir, const std::string& out) {
    auto result = stap::aggregate_ranking(stap::load_ranking_sheets(dir));
    std::string text = stap::ranking_result_to_json(result).dump(2) + "\n";
    if (!out.empty()) stap::write_file(out, text);
    std::cout << text;
    if (result.tie()) std::cerr << "note: tie between " << json(result.best).dump() << "; no tiebreak applied\n";
    return 0;
}

int cmd_annotate(const std::string& hints, const std::string& entries, const std::string& annotator,
                 const std::string& store_path) {
    stap::AnnotationStore store;
    if (fs::exists(store_path)) {
        for (auto& a : stap::annotations_from_jsonl(stap::read_file(store_path))) store.add(std::move(a));
    }
    std::size_t before = store.size();
    stap::annotate(store, stap::hint_ids_from_jsonl(stap::read_file(hints)), annotator, stap::read_file(entries));
    std::vector<stap::RubricAnnotation> added(store.all().begin() + static_cast<std::ptrdiff_t>(before),
                                              store.all().end());
    std::string existing = fs::exists(store_path) ? stap::read_file(store_path) : std::string();
    if (!existing.empty() && existing.back() != '\n') existing.push_back('\n');
    stap::write_file(store_path, existing + stap::annotations_to_jsonl(added));
    std::cout << json{{"accepted", added.size()}, {"store", store_path}, {"total", store.size()}}.dump() << "\n";
    return 0;
}

int cmd_kappa(const std::string& a_path, const std::string& b_path, const std::string& criterion) {
    auto a = stap::annotations_from_jsonl(stap::read_file(a_path));
    auto b = stap::annotations_from_jsonl(stap::read_file(b_path));
    std::map<std::string, const stap::RubricAnnotation*> b_by_hint;
    for (const auto& x : b) b_by_hint[x.hint_id] = &x;
    std::vector<std::pair<const stap::RubricAnnotation*, const stap::RubricAnnotation*>> pairs;
    for (const auto& x : a) {
        auto it = b_by_hint.find(x.hint_id);
        if (it != b_by_hint.end()) pairs.emplace_back(&x, it->second);
    }
    if (pairs.empty()) throw stap::ValidationError("the two annotation files share no hint ids");
    if (pairs.size() != a.size() || pairs.size() != b.size()) {
        std::cerr << "warning: comparing the " << pairs.size() << " hints annotated in both files\n";
    }
    std::vector<std::string> criteria;
    if (criterion == "all") {
        criteria = stap::rubric_criteria();
    } else {
        criteria.push_back(criterion);
    }
    json out = json::array();
    for (const auto& c : criteria) {
        std::vector<std::string> la, lb;
        for (const auto& [x, y] : pairs) {
            la.push_back(stap::criterion_label(*x, c));
            lb.push_back(stap::criterion_label(*y, c));
        }
        out.push_back(stap::kappa_report_to_json(stap::cohens_kappa(la, lb, c)));
    }
    std::cout << (criterion == "all" ? out : out[0]).dump(2) << "\n";
    return 0;
}

int cmd_report(const std::string& events, const std::string& out_dir, const std::string& annotations) {
    auto report = stap::rating_report(stap::read_file(events));
    stap::write_rating_report(report, out_dir);
    json summary = stap::rating_report_to_json(report);
    if (!annotations.empty()) {
        auto rubric = stap::rubric_report(stap::annotations_from_jsonl(stap::read_file(annotations)));
        stap::write_file(fs::path(out_dir) / "rubric.csv", stap::rubric_report_csv(rubric));
        stap::write_file(fs::path(out_dir) / "rubric.json", stap::rubric_report_to_json(rubric).dump(2) + "\n");
        summary["rubric_n"] = rubric.n;
    }
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_check(const std::string& exercise_id, const std::string& file, const std::string& catalog_dir,
              const std::string& runner_config) {
    auto catalog = stap::load_catalog(opt_path(catalog_dir));
    auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& e) { return e.id == exercise_id; });
    if (it == catalog.end()) throw stap::NotFoundError("unknown exercise '" + exercise_id + "'");
    auto result = stap::check_solution(*it, stap::read_file(file), stap::load_runner_config(opt_path(runner_config)));
    std::cout << stap::check_result_to_json(result).dump(2) << "\n";
    return result.passed ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stap-eval: hint-generation experiments and reports"};
    app.require_subcommand(1);

    std::string log, format = "csv", student, exercise, out, checker = "embedded";
    std::size_t window = stap::default_trace_window;
    auto* pre = app.add_subcommand("preprocess", "Clean a raw keystroke log into a step sequence");
    pre->add_option("--log", log, "Raw log file")->required();
    pre->add_option("--format", format, "csv or jsonl");
    pre->add_option("--student", student, "Student id")->required();
    pre->add_option("--exercise", exercise, "Exercise id")->required();
    pre->add_option("--out", out, "Output step sequence (JSONL)")->required();
    pre->add_option("--checker", checker, "embedded or external");
    pre->add_option("--trace-window", window, "Look-ahead for transient prints");

    std::string manifest, gen_out, catalog_dir;
    bool use_mock = false, use_live = false;
    std::uint64_t seed = 0;
    auto* gen = app.add_subcommand("generate", "Generate hints for every step x prompt spec");
    gen->add_option("--manifest", manifest, "Experiment manifest (JSON)")->required();
    auto* mock_flag = gen->add_flag("--mock", use_mock, "Deterministic offline model");
    auto* live_flag = gen->add_flag("--live", use_live, "Chat-completions API (STAP_API_KEY)");
    mock_flag->excludes(live_flag);
    gen->add_option("--seed", seed, "Mock seed");
    gen->add_option("--out", gen_out, "Override the manifest output path");
    gen->add_option("--catalog-dir", catalog_dir, "Extra exercise definitions");

    std::string sheets, rank_out;
    auto* rank = app.add_subcommand("rank", "Aggregate prompt ranking sheets");
    rank->add_option("--sheets", sheets, "Directory of ranking sheets (*.json)")->required();
    rank->add_option("--out", rank_out, "Also write the result here");

    std::string hints, entries, annotator, store = "annotations.jsonl";
    auto* ann = app.add_subcommand("annotate", "Validate rubric annotations and add them to the store");
    ann->add_option("--hints", hints, "Generated hints (JSONL)")->required();
    ann->add_option("--entries", entries, "Annotation entries (JSONL)")->required();
    ann->add_option("--annotator", annotator, "Annotator id")->required();
    ann->add_option("--store", store, "Annotation store (JSONL)");

    std::string ka, kb, criterion = "all";
    auto* kap = app.add_subcommand("kappa", "Cohen's kappa between two annotators");
    kap->add_option("--a", ka, "Annotations of rater A")->required();
    kap->add_option("--b", kb, "Annotations of rater B")->required();
    kap->add_option("--criterion", criterion, "Criterion name or 'all'");

    std::string events, report_out, annotations;
    auto* rep = app.add_subcommand("report", "Rating histograms and rubric tables");
    rep->add_option("--events", events, "Event export (JSONL)")->required();
    rep->add_option("--out", report_out, "Output directory")->required();
    rep->add_option("--annotations", annotations, "Annotation store for rubric tables");

    std::string check_ex, check_file, runner_config;
    auto* chk = app.add_subcommand("check", "Run a program against an exercise's tests");
    chk->add_option("--exercise", check_ex, "Exercise id")->required();
    chk->add_option("--file", check_file, "Program file")->required();
    chk->add_option("--catalog-dir", catalog_dir, "Extra exercise definitions");
    chk->add_option("--runner-config", runner_config, "Runner configuration (JSON)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*pre) return cmd_preprocess(log, format, student, exercise, out, checker, window);
        if (*gen) {
            if (!use_mock && !use_live) throw stap::ValidationError("generate needs --mock or --live");
            return cmd_generate(manifest, use_live, seed, gen_out, catalog_dir);
        }
        if (*rank) return cmd_rank(sheets, rank_out);
        if (*ann) return cmd_annotate(hints, entries, annotator, store);
        if (*kap) return cmd_kappa(ka, kb, criterion);
        if (*rep) return cmd_report(events, report_out, annotations);
        if (*chk) return cmd_check(check_ex, check_file, catalog_dir, runner_config);
    } catch (const stap::Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
