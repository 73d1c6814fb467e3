#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "stap/exercise.hpp"
#include "stap/llm.hpp"
#include "stap/prompt.hpp"
#include "stap/snapshot.hpp"

namespace stap {

struct ExperimentManifest {
    std::vector<std::string> exercise_ids;  // empty: any exercise in the catalog
    std::vector<std::filesystem::path> step_sequence_paths;
    std::vector<PromptSpec> prompt_specs;
    int samples_per_state = 1;
    std::filesystem::path output_path;
    std::string model_id;  // empty: default_model_id()
};

// Throws ValidationError: no specs, samples_per_state < 1, bad spec.
void validate_manifest(const ExperimentManifest& manifest);

// Relative paths are resolved against `base_dir`.
ExperimentManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json manifest_to_json(const ExperimentManifest& manifest);
ExperimentManifest load_manifest(const std::filesystem::path& path);

struct StepRef {
    std::string student_id;
    std::string exercise_id;
    std::uint64_t step_index = 0;  // seq_index of the snapshot
    std::size_t position = 0;      // position within the cleaned sequence
};

struct ExperimentRecord {
    std::string hint_id;  // deterministic from step, spec and sample
    StepRef step_ref;
    PromptSpec spec;
    int sample = 0;
    std::string prompt_text;
    std::string hint_text;
    std::int64_t latency_ms = 0;
    std::string status;  // "ok" or "failed"
    std::string error;
};

struct ExperimentResult {
    std::vector<ExperimentRecord> records;
    std::size_t ok = 0;
    std::size_t failed = 0;
    std::vector<std::string> failures;  // "<hint_id>: <message>"
    std::vector<std::string> warnings;
};

// One record per (step x spec x sample), in that nesting order. Backend
// failures mark the record failed and the run continues; a missing
// credential aborts the run.
ExperimentResult run_experiment(const ExperimentManifest& manifest, const std::vector<StepSequence>& sequences,
                                const std::vector<Exercise>& catalog, const LlmClient& client);
// Reads manifest.step_sequence_paths.
ExperimentResult run_experiment(const ExperimentManifest& manifest, const std::vector<Exercise>& catalog,
                                const LlmClient& client);

nlohmann::json record_to_json(const ExperimentRecord& record);
ExperimentRecord record_from_json(const nlohmann::json& j);
std::string records_to_jsonl(const std::vector<ExperimentRecord>& records);
nlohmann::json experiment_summary_json(const ExperimentResult& result);

} // namespace stap
