#include "stap/exercise.hpp"

#include "stap/error.hpp"
#include "stap/process.hpp"
#include "stap/util.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stap {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Reference implementations

std::uint64_t clump_oracle(const std::vector<long long>& values) {
    std::uint64_t clumps = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] == values[i - 1]) {
            if (++run == 2) ++clumps;
        } else {
            run = 1;
        }
    }
    return clumps;
}

std::string brackets_reference(std::string_view word) {
    const std::size_t n = word.size();
    std::size_t pairs = 0;
    if (n % 2 == 1) {
        pairs = (n - 1) / 2;
    } else if (n >= 2) {
        pairs = n / 2 - 1;
    }
    std::string out;
    out.reserve(n + 2 * pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        out.push_back(word[i]);
        out.push_back('(');
    }
    out.append(word.substr(pairs, n - 2 * pairs));
    for (std::size_t i = n - pairs; i < n; ++i) {
        out.push_back(')');
        out.push_back(word[i]);
    }
    return out;
}

std::pair<long long, long long> pies_reference(long long dollars, long long cents, long long count) {
    long long total = (100 * dollars + cents) * count;
    return {total / 100, total % 100};
}

// ---------------------------------------------------------------------------
// Built-in catalog

namespace {

// Portable draws from mt19937 (std distributions differ between libraries).
struct Draw {
    std::mt19937 rng;
    explicit Draw(std::uint32_t seed) : rng(seed) {}
    long long between(long long lo, long long hi) {
        return lo + static_cast<long long>(rng() % static_cast<std::uint32_t>(hi - lo + 1));
    }
};

std::string pies_input(long long a, long long b, long long n) {
    return std::to_string(a) + "\n" + std::to_string(b) + "\n" + std::to_string(n) + "\n";
}

std::string clumps_input(const std::vector<long long>& xs) {
    std::string in = std::to_string(xs.size()) + "\n";
    for (auto x : xs) in += std::to_string(x) + "\n";
    return in;
}

Exercise make_pies() {
    Exercise e;
    e.id = "pies";
    e.title = "Pies";
    e.description =
        "A single pie costs A dollars and B cents in the cafe. Calculate how many dollars and cents one needs "
        "to pay for N pies.\n"
        "\n"
        "Input: The program receives three numbers\n"
        "A - how many dollars a pie costs;\n"
        "B - how many cents a pie costs;\n"
        "N - how many pies do you need to buy\n"
        "\n"
        "Output: Print out two numbers: the cost of N pies in dollars and cents.";
    e.starter_code = "";
    e.model_solution =
        "a = int(input())\n"
        "b = int(input())\n"
        "n = int(input())\n"
        "total = (a * 100 + b) * n\n"
        "print(total // 100, total % 100)\n";
    auto add = [&](const std::string& name, long long a, long long b, long long n) {
        auto [d, c] = pies_reference(a, b, n);
        e.tests.push_back({name, pies_input(a, b, n), std::to_string(d) + " " + std::to_string(c)});
    };
    add("three pies at 3.50", 3, 50, 2);
    add("cents carry over", 10, 15, 2);
    add("single pie", 2, 99, 1);
    add("no cents", 5, 0, 4);
    add("zero dollars", 0, 45, 7);
    Draw draw(20231);
    for (int i = 0; i < 5; ++i) {
        add("random " + std::to_string(i + 1), draw.between(0, 100), draw.between(0, 99), draw.between(1, 1000));
    }
    return e;
}

Exercise make_brackets() {
    Exercise e;
    e.id = "brackets";
    e.title = "Brackets";
    e.description =
        "Place opening and closing brackets into the input string like this: for odd length: example \xe2\x86\x92 "
        "e(x(a(m)p)l)e; for even length: card \xe2\x86\x92 c(ar)d, but not c(a()r)d.\n"
        "\n"
        "Input: The program receives a string of English letters (lowercase and uppercase).\n"
        "\n"
        "Output: Print out the string with the brackets added.";
    e.starter_code = "";
    e.model_solution =
        "s = input()\n"
        "n = len(s)\n"
        "pairs = (n - 1) // 2\n"
        "result = \"\"\n"
        "for i in range(pairs):\n"
        "    result += s[i] + \"(\"\n"
        "result += s[pairs:n - pairs]\n"
        "for i in range(n - pairs, n):\n"
        "    result += \")\" + s[i]\n"
        "print(result)\n";
    auto add = [&](const std::string& name, const std::string& word) {
        e.tests.push_back({name, word + "\n", brackets_reference(word)});
    };
    add("odd example", "example");
    add("even example", "card");
    add("mixed case", "PyThOn");
    add("three letters", "abc");
    Draw draw(7919);
    static constexpr std::string_view letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    for (int i = 0; i < 6; ++i) {
        std::string w;
        auto len = draw.between(3, 14);
        for (long long k = 0; k < len; ++k) w.push_back(letters[static_cast<std::size_t>(draw.between(0, 51))]);
        add("random " + std::to_string(i + 1), w);
    }
    return e;
}

Exercise make_clumps() {
    Exercise e;
    e.id = "clumps";
    e.title = "Clumps";
    e.description =
        "Say that a \"clump\" in an array is a series of 2 or more adjacent elements of the same value. Return "
        "the number of clumps in the given array. For example, an array with the numbers [2,2,3,5,6,6,2] has "
        "2 clumps.\n"
        "\n"
        "Input: The program receives a number n, followed by n lines with one integer per line.\n"
        "\n"
        "Output: Print out the number of clumps";
    e.starter_code = "";
    e.model_solution =
        "n = int(input())\n"
        "values = [int(input()) for _ in range(n)]\n"
        "clumps = 0\n"
        "i = 0\n"
        "while i < n:\n"
        "    j = i\n"
        "    while j + 1 < n and values[j + 1] == values[i]:\n"
        "        j += 1\n"
        "    if j > i:\n"
        "        clumps += 1\n"
        "    i = j + 1\n"
        "print(clumps)\n";
    auto add = [&](const std::string& name, const std::vector<long long>& xs) {
        e.tests.push_back({name, clumps_input(xs), std::to_string(clump_oracle(xs))});
    };
    add("worked example", {2, 2, 3, 5, 6, 6, 2});
    add("empty array", {});
    add("one long clump", {1, 1, 1});
    add("no clumps", {1, 2, 3, 4});
    add("clumps at both ends", {5, 5, 1, 2, 7, 7, 7});
    Draw draw(104729);
    for (int i = 0; i < 5; ++i) {
        std::vector<long long> xs;
        auto len = draw.between(1, 20);
        for (long long k = 0; k < len; ++k) xs.push_back(draw.between(0, 3));
        add("random " + std::to_string(i + 1), xs);
    }
    return e;
}

bool has_paragraph(std::string_view description, std::string_view label) {
    for (const auto& line : split_lines(description)) {
        auto t = trim_view(line);
        // Tolerate light markup such as *Input*: or **Output**
        while (!t.empty() && (t.front() == '*' || t.front() == '_' || t.front() == '#')) t.remove_prefix(1);
        t = trim_view(t);
        if (starts_with(t, label)) return true;
    }
    return false;
}

} // namespace

std::vector<Exercise> builtin_exercises() { return {make_pies(), make_brackets(), make_clumps()}; }

void validate_exercise(const Exercise& e) {
    auto bad = [&](const std::string& field, const std::string& why) {
        throw ValidationError("exercise '" + e.id + "': field '" + field + "' " + why);
    };
    if (e.id.empty()) bad("id", "must be non-empty");
    for (char c : e.id) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) bad("id", "must be a slug");
    }
    if (e.title.empty()) bad("title", "must be non-empty");
    if (trim_view(e.description).empty()) bad("description", "must be non-empty");
    if (!has_paragraph(e.description, "Input")) bad("description", "must contain an Input paragraph");
    if (!has_paragraph(e.description, "Output")) bad("description", "must contain an Output paragraph");
    if (e.tests.empty()) bad("tests", "must be non-empty");
    for (std::size_t i = 0; i < e.tests.size(); ++i) {
        if (e.tests[i].name.empty()) bad("tests[" + std::to_string(i) + "].name", "must be non-empty");
    }
}

Exercise exercise_from_json(const json& j) {
    auto field = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
        return j.at(key);
    };
    auto str = [&](const char* key) {
        const auto& v = field(key);
        if (!v.is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
        return v.get<std::string>();
    };
    if (!j.is_object()) throw ValidationError("exercise definition must be a JSON object");
    Exercise e;
    e.id = str("id");
    e.title = str("title");
    e.description = str("description");
    e.starter_code = j.contains("starter_code") ? str("starter_code") : std::string();
    if (j.contains("model_solution") && !j.at("model_solution").is_null()) e.model_solution = str("model_solution");
    const auto& tests = field("tests");
    if (!tests.is_array()) throw ValidationError("field 'tests' must be an array");
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const auto& t = tests[i];
        auto tf = [&](const char* key) {
            if (!t.is_object() || !t.contains(key) || !t.at(key).is_string()) {
                throw ValidationError("field 'tests[" + std::to_string(i) + "]." + key + "' must be a string");
            }
            return t.at(key).get<std::string>();
        };
        e.tests.push_back({tf("name"), tf("stdin"), tf("expected_stdout")});
    }
    validate_exercise(e);
    return e;
}

json exercise_to_json(const Exercise& e, bool include_model_solution) {
    json tests = json::array();
    for (const auto& t : e.tests) {
        tests.push_back({{"name", t.name}, {"stdin", t.stdin_text}, {"expected_stdout", t.expected_stdout}});
    }
    json j = {{"id", e.id},
              {"title", e.title},
              {"description", e.description},
              {"starter_code", e.starter_code},
              {"tests", tests}};
    if (include_model_solution && e.model_solution) j["model_solution"] = *e.model_solution;
    return j;
}

std::vector<Exercise> load_catalog(const std::optional<std::filesystem::path>& dir, const CatalogOptions& options) {
    std::vector<Exercise> catalog;
    if (options.include_builtins) catalog = builtin_exercises();
    if (!dir) return catalog;
    if (!std::filesystem::is_directory(*dir)) throw ConfigError("catalog directory not found: " + dir->string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(*dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        Exercise e;
        try {
            e = exercise_from_json(json::parse(read_file(f)));
        } catch (const json::exception& err) {
            throw ValidationError(f.filename().string() + ": invalid JSON (" + err.what() + ")");
        } catch (const ValidationError& err) {
            throw ValidationError(f.filename().string() + ": " + err.what());
        }
        auto same = std::find_if(catalog.begin(), catalog.end(), [&](const Exercise& x) { return x.id == e.id; });
        if (same != catalog.end()) {
            *same = std::move(e);
        } else {
            catalog.push_back(std::move(e));
        }
    }
    return catalog;
}

// ---------------------------------------------------------------------------
// Running solutions

RunnerConfig load_runner_config(const std::optional<std::filesystem::path>& config_file) {
    RunnerConfig cfg;
    if (config_file) {
        json j;
        try {
            j = json::parse(read_file(*config_file));
            if (j.contains("command")) cfg.command = j.at("command").get<std::string>();
            if (j.contains("timeout_seconds")) cfg.timeout_seconds = j.at("timeout_seconds").get<double>();
            if (j.contains("max_output_bytes")) cfg.max_output_bytes = j.at("max_output_bytes").get<std::size_t>();
        } catch (const json::exception& e) {
            throw ConfigError("runner config " + config_file->string() + ": " + e.what());
        }
    }
    if (auto v = env_or("STAP_RUNNER_COMMAND"); !v.empty()) cfg.command = v;
    try {
        if (auto v = env_or("STAP_RUNNER_TIMEOUT"); !v.empty()) cfg.timeout_seconds = std::stod(v);
        if (auto v = env_or("STAP_RUNNER_MAX_OUTPUT"); !v.empty()) cfg.max_output_bytes = std::stoul(v);
    } catch (const std::exception&) {
        throw ConfigError("invalid STAP_RUNNER_TIMEOUT or STAP_RUNNER_MAX_OUTPUT");
    }
    if (!(cfg.timeout_seconds > 0)) throw ConfigError("runner timeout must be positive");
    if (cfg.command.find("{file}") == std::string::npos) throw ConfigError("runner command lacks {file} placeholder");
    return cfg;
}

bool output_matches(std::string_view actual, std::string_view expected) {
    return split_whitespace(actual) == split_whitespace(expected);
}

CheckResult check_solution(const Exercise& exercise, const std::string& source, const RunnerConfig& runner) {
    auto argv_template = split_command(runner.command);
    if (argv_template.empty()) throw ConfigError("empty runner command");
    if (!find_executable(argv_template.front())) {
        throw ConfigError("runner executable not found: " + argv_template.front());
    }
    TempDir dir;
    auto program = dir.path() / "main.py";
    write_file(program, source);
    std::vector<std::string> argv;
    for (auto arg : argv_template) {
        for (auto at = arg.find("{file}"); at != std::string::npos; at = arg.find("{file}", at)) {
            arg.replace(at, 6, program.string());
            at += program.string().size();
        }
        argv.push_back(std::move(arg));
    }
    ProcessOptions opts;
    opts.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(runner.timeout_seconds * 1000)));
    opts.max_output_bytes = runner.max_output_bytes;
    opts.working_dir = dir.path();

    CheckResult result;
    result.passed = true;
    for (const auto& test : exercise.tests) {
        ProcessResult r = run_process(argv, test.stdin_text, opts);
        TestOutcome o;
        o.name = test.name;
        o.actual_stdout = r.stdout_text;
        o.stderr_text = r.stderr_text;
        o.timed_out = r.timed_out;
        o.passed = !r.timed_out && !r.truncated && r.exit_code == 0 && output_matches(r.stdout_text, test.expected_stdout);
        result.passed = result.passed && o.passed;
        result.per_test.push_back(std::move(o));
    }
    return result;
}

json check_result_to_json(const CheckResult& result) {
    json tests = json::array();
    for (const auto& t : result.per_test) {
        tests.push_back({{"name", t.name},
                         {"passed", t.passed},
                         {"actual_stdout", t.actual_stdout},
                         {"stderr", t.stderr_text},
                         {"timed_out", t.timed_out}});
    }
    return {{"passed", result.passed}, {"per_test", tests}};
}

} // namespace stap
