#include "stap/experiment.hpp"

#include "stap/error.hpp"
#include "stap/util.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace stap {

using nlohmann::json;
namespace fs = std::filesystem;

void validate_manifest(const ExperimentManifest& m) {
    if (m.prompt_specs.empty()) throw ValidationError("manifest: prompt_specs must be non-empty");
    if (m.samples_per_state < 1) throw ValidationError("manifest: samples_per_state must be at least 1");
    for (const auto& s : m.prompt_specs) validate_spec(s);
}

ExperimentManifest manifest_from_json(const json& j, const fs::path& base_dir) {
    ExperimentManifest m;
    try {
        if (j.contains("exercise_ids")) m.exercise_ids = j["exercise_ids"].get<std::vector<std::string>>();
        for (const auto& p : j.at("step_sequence_paths")) {
            fs::path path = p.get<std::string>();
            m.step_sequence_paths.push_back(path.is_relative() && !base_dir.empty() ? base_dir / path : path);
        }
        for (const auto& s : j.at("prompt_specs")) m.prompt_specs.push_back(spec_from_json(s));
        m.samples_per_state = j.value("samples_per_state", 1);
        if (j.contains("output_path")) {
            fs::path out = j["output_path"].get<std::string>();
            m.output_path = out.is_relative() && !base_dir.empty() ? base_dir / out : out;
        }
        m.model_id = j.value("model_id", std::string());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
    validate_manifest(m);
    return m;
}

json manifest_to_json(const ExperimentManifest& m) {
    json paths = json::array();
    for (const auto& p : m.step_sequence_paths) paths.push_back(p.string());
    json specs = json::array();
    for (const auto& s : m.prompt_specs) specs.push_back(spec_to_json(s));
    json j = {{"exercise_ids", m.exercise_ids},
              {"step_sequence_paths", paths},
              {"prompt_specs", specs},
              {"samples_per_state", m.samples_per_state},
              {"output_path", m.output_path.string()}};
    if (!m.model_id.empty()) j["model_id"] = m.model_id;
    return j;
}

ExperimentManifest load_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return manifest_from_json(j, path.parent_path());
}

namespace {

struct Job {
    std::size_t slot;
    StepRef ref;
    const Exercise* exercise;
    const std::string* source;
    PromptSpec spec;
    int sample;
};

std::string record_id(const StepRef& ref, const PromptSpec& spec, int sample) {
    std::string key = ref.student_id + '\x1f' + ref.exercise_id + '\x1f' + std::to_string(ref.step_index) + '\x1f' +
                      std::to_string(ref.position) + '\x1f' + spec.id() + '\x1f' + std::to_string(sample);
    return to_hex(fnv1a64(key));
}

} // namespace

ExperimentResult run_experiment(const ExperimentManifest& manifest, const std::vector<StepSequence>& sequences,
                                const std::vector<Exercise>& catalog, const LlmClient& client) {
    validate_manifest(manifest);
    ExperimentResult result;
    std::vector<Job> jobs;
    for (const auto& seq : sequences) {
        if (!manifest.exercise_ids.empty() &&
            std::find(manifest.exercise_ids.begin(), manifest.exercise_ids.end(), seq.exercise_id) ==
                manifest.exercise_ids.end()) {
            throw ValidationError("sequence of student '" + seq.student_id + "' is for exercise '" + seq.exercise_id +
                                  "', which the manifest does not list");
        }
        auto ex = std::find_if(catalog.begin(), catalog.end(), [&](const Exercise& e) { return e.id == seq.exercise_id; });
        if (ex == catalog.end()) throw NotFoundError("unknown exercise '" + seq.exercise_id + "'");
        if (seq.steps.empty()) {
            result.warnings.push_back("sequence of student '" + seq.student_id + "' (" + seq.exercise_id +
                                      ") has no steps");
            continue;
        }
        for (std::size_t pos = 0; pos < seq.steps.size(); ++pos) {
            StepRef ref{seq.student_id, seq.exercise_id, seq.steps[pos].seq_index, pos};
            for (const auto& spec : manifest.prompt_specs) {
                for (int sample = 0; sample < manifest.samples_per_state; ++sample) {
                    jobs.push_back({jobs.size(), ref, &*ex, &seq.steps[pos].source, spec, sample});
                }
            }
        }
    }

    result.records.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex abort_mutex;
    std::exception_ptr abort;
    const std::string model = manifest.model_id.empty() ? default_model_id() : manifest.model_id;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            {
                std::lock_guard lock(abort_mutex);
                if (abort) return;
            }
            const Job& job = jobs[i];
            ExperimentRecord& rec = result.records[job.slot];
            rec.hint_id = record_id(job.ref, job.spec, job.sample);
            rec.step_ref = job.ref;
            rec.spec = job.spec;
            rec.sample = job.sample;
            try {
                rec.prompt_text = render_prompt_text(job.spec, *job.exercise, *job.source);
                CompletionRequest req;
                req.model_id = model;
                req.temperature = job.spec.temperature;
                req.prompt_text = rec.prompt_text;
                CompletionResponse resp = client.complete(req);
                rec.hint_text = resp.text;
                rec.latency_ms = resp.latency_ms;
                rec.status = "ok";
            } catch (const CredentialError&) {
                std::lock_guard lock(abort_mutex);
                if (!abort) abort = std::current_exception();
                return;
            } catch (const Error& e) {
                rec.status = "failed";
                rec.error = std::string(e.kind()) + ": " + e.what();
            }
        }
    };
    std::size_t threads = std::min<std::size_t>(client.max_in_flight(), std::max<std::size_t>(jobs.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (abort) std::rethrow_exception(abort);

    for (const auto& rec : result.records) {
        if (rec.status == "ok") {
            ++result.ok;
        } else {
            ++result.failed;
            result.failures.push_back(rec.hint_id + ": " + rec.error);
        }
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentManifest& manifest, const std::vector<Exercise>& catalog,
                                const LlmClient& client) {
    std::vector<StepSequence> sequences;
    for (const auto& p : manifest.step_sequence_paths) sequences.push_back(read_step_sequence(p));
    return run_experiment(manifest, sequences, catalog, client);
}

json record_to_json(const ExperimentRecord& r) {
    json j = {{"hint_id", r.hint_id},
              {"step_ref",
               {{"student_id", r.step_ref.student_id},
                {"exercise_id", r.step_ref.exercise_id},
                {"step_index", r.step_ref.step_index},
                {"position", r.step_ref.position}}},
              {"spec", spec_to_json(r.spec)},
              {"spec_id", r.spec.id()},
              {"sample", r.sample},
              {"prompt_text", r.prompt_text},
              {"hint_text", r.hint_text},
              {"latency_ms", r.latency_ms},
              {"status", r.status}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

ExperimentRecord record_from_json(const json& j) {
    try {
        ExperimentRecord r;
        r.hint_id = j.at("hint_id").get<std::string>();
        const auto& s = j.at("step_ref");
        r.step_ref = {s.at("student_id").get<std::string>(), s.at("exercise_id").get<std::string>(),
                      s.at("step_index").get<std::uint64_t>(), s.at("position").get<std::size_t>()};
        r.spec = spec_from_json(j.at("spec"));
        r.sample = j.at("sample").get<int>();
        r.prompt_text = j.at("prompt_text").get<std::string>();
        r.hint_text = j.at("hint_text").get<std::string>();
        r.latency_ms = j.at("latency_ms").get<std::int64_t>();
        r.status = j.at("status").get<std::string>();
        r.error = j.value("error", std::string());
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed experiment record: ") + e.what());
    }
}

std::string records_to_jsonl(const std::vector<ExperimentRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out.push_back('\n');
    }
    return out;
}

json experiment_summary_json(const ExperimentResult& result) {
    return {{"records", result.records.size()},
            {"ok", result.ok},
            {"failed", result.failed},
            {"failures", result.failures},
            {"warnings", result.warnings}};
}

} // namespace stap
