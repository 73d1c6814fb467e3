#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace stap {

struct IoTest {
    std::string name;
    std::string stdin_text;
    std::string expected_stdout;
};

struct Exercise {
    std::string id;
    std::string title;
    // Full problem text; must contain an "Input" and an "Output" paragraph.
    std::string description;
    std::string starter_code;
    std::vector<IoTest> tests;
    std::optional<std::string> model_solution;
};

struct TestOutcome {
    std::string name;
    bool passed = false;
    std::string actual_stdout;
    std::string stderr_text;
    bool timed_out = false;
};

struct CheckResult {
    bool passed = false;  // true iff every test passed
    std::vector<TestOutcome> per_test;
};

struct RunnerConfig {
    // `{file}` is replaced by the path of the program file.
    std::string command = "python3 {file}";
    double timeout_seconds = 5.0;
    std::size_t max_output_bytes = 64 * 1024;
};

// Defaults, then the JSON config file (if given), then STAP_RUNNER_COMMAND,
// STAP_RUNNER_TIMEOUT and STAP_RUNNER_MAX_OUTPUT.
RunnerConfig load_runner_config(const std::optional<std::filesystem::path>& config_file = std::nullopt);

// Throws ValidationError naming the field when the invariants do not hold.
void validate_exercise(const Exercise& exercise);

Exercise exercise_from_json(const nlohmann::json& j);
// `include_model_solution` is false for anything shown to students.
nlohmann::json exercise_to_json(const Exercise& exercise, bool include_model_solution = true);

// The three exercises the tutor ships with: pies, brackets, clumps.
std::vector<Exercise> builtin_exercises();

struct CatalogOptions {
    bool include_builtins = true;
};

// Built-ins (optional) followed by every *.json definition in `dir`, sorted by
// file name. A file whose id matches a built-in replaces it. Throws
// ValidationError naming the file and field for malformed definitions.
std::vector<Exercise> load_catalog(const std::optional<std::filesystem::path>& dir,
                                   const CatalogOptions& options = {});

// Whitespace-token equality of program output.
bool output_matches(std::string_view actual, std::string_view expected);

// Runs `source` once per test. A test passes when the program exits 0 within
// the time limit and its output matches; a missing runner executable is a
// ConfigError.
CheckResult check_solution(const Exercise& exercise, const std::string& source, const RunnerConfig& runner);

nlohmann::json check_result_to_json(const CheckResult& result);

// Reference implementations used to generate test cases.
std::uint64_t clump_oracle(const std::vector<long long>& values);
std::string brackets_reference(std::string_view word);
std::pair<long long, long long> pies_reference(long long dollars, long long cents, long long count);

} // namespace stap
