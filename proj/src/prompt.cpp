#include "stap/prompt.hpp"

#include "stap/error.hpp"
#include "stap/exercise.hpp"
#include "stap/util.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace stap {

using nlohmann::json;

namespace {

struct InstructionRow {
    Instruction value;
    std::string_view id;
    std::string_view text;
};

constexpr std::array<InstructionRow, 5> instruction_table = {{
    {Instruction::I, "i", "What is the next step?"},
    {Instruction::II, "ii", "Give a hint for the next step."},
    {Instruction::III, "iii", "Explain the next step for a student"},
    {Instruction::IV, "iv", "Give this student a short hint for the next step."},
    {Instruction::V, "v", "Give this student a hint for the next step. The hint should be one or two sentences."},
}};

const InstructionRow& row(Instruction instruction) {
    return instruction_table[static_cast<std::size_t>(instruction)];
}

void append_fenced(std::string& out, std::string_view code) {
    out += "```\n";
    out += code;
    if (!code.empty() && code.back() != '\n') out.push_back('\n');
    out += "```\n";
}

} // namespace

std::string_view instruction_id(Instruction instruction) { return row(instruction).id; }
std::string_view instruction_text(Instruction instruction) { return row(instruction).text; }

Instruction instruction_from_id(std::string_view id) {
    for (const auto& r : instruction_table) {
        if (r.id == id) return r.value;
    }
    throw ValidationError("unknown instruction '" + std::string(id) + "'");
}

const std::vector<Instruction>& all_instructions() {
    static const std::vector<Instruction> all = {Instruction::I, Instruction::II, Instruction::III, Instruction::IV,
                                                 Instruction::V};
    return all;
}

std::vector<AttributeCombo> all_attribute_combos() {
    return {{false, false}, {true, false}, {false, true}, {true, true}};
}

std::string PromptSpec::id() const {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%g", temperature);
    return std::string(instruction_id(instruction)) + "-d" + (include_description ? "1" : "0") + "-s" +
           (include_model_solution ? "1" : "0") + "-t" + temp;
}

PromptSpec default_spec() { return {Instruction::V, true, false, 0.5}; }

std::vector<double> temperature_grid() {
    std::vector<double> grid;
    for (int step = 0; step < 5; ++step) grid.push_back((1 + 2 * step) / 10.0);
    return grid;
}

void validate_spec(const PromptSpec& spec) {
    if (!(spec.temperature >= 0.0 && spec.temperature <= 1.0)) {
        throw ValidationError("temperature must be within [0, 1]");
    }
}

std::vector<PromptSpec> enumerate_matrix(const std::vector<Instruction>& instructions,
                                         const std::vector<AttributeCombo>& combos) {
    if (instructions.empty() || combos.empty()) throw ValidationError("enumerate_matrix needs non-empty inputs");
    std::vector<PromptSpec> out;
    for (auto ins : instructions) {
        for (const auto& c : combos) {
            out.push_back({ins, c.include_description, c.include_model_solution, default_spec().temperature});
        }
    }
    return out;
}

std::vector<PromptSpec> enumerate_matrix(const std::vector<Instruction>& instructions,
                                         const std::vector<double>& temperatures, AttributeCombo combo) {
    if (instructions.empty() || temperatures.empty()) {
        throw ValidationError("enumerate_matrix needs non-empty inputs");
    }
    std::vector<PromptSpec> out;
    for (auto ins : instructions) {
        for (double t : temperatures) {
            PromptSpec s{ins, combo.include_description, combo.include_model_solution, t};
            validate_spec(s);
            out.push_back(s);
        }
    }
    return out;
}

std::string render_prompt_text(const PromptSpec& spec, const Exercise& exercise, std::string_view student_code) {
    validate_spec(spec);
    if (spec.include_model_solution && !exercise.model_solution) {
        throw ValidationError("exercise '" + exercise.id + "' has no model solution");
    }
    std::string out;
    if (spec.include_description) {
        out += "Problem description:\n";
        out += exercise.description;
        if (exercise.description.empty() || exercise.description.back() != '\n') out.push_back('\n');
        out.push_back('\n');
    }
    if (spec.include_model_solution) {
        out += "Model solution:\n";
        append_fenced(out, *exercise.model_solution);
        out.push_back('\n');
    }
    out += "Student code:\n";
    append_fenced(out, student_code);
    out.push_back('\n');
    out += instruction_text(spec.instruction);
    out.push_back('\n');
    return out;
}

Prompt render_prompt(const PromptSpec& spec, const Exercise& exercise, std::string_view student_code) {
    return {render_prompt_text(spec, exercise, student_code), spec, exercise.id, to_hex(fnv1a64(student_code))};
}

json spec_to_json(const PromptSpec& spec) {
    return {{"instruction", instruction_id(spec.instruction)},
            {"include_description", spec.include_description},
            {"include_model_solution", spec.include_model_solution},
            {"temperature", spec.temperature}};
}

PromptSpec spec_from_json(const json& j) {
    try {
        PromptSpec s;
        s.instruction = instruction_from_id(j.at("instruction").get<std::string>());
        s.include_description = j.at("include_description").get<bool>();
        s.include_model_solution = j.at("include_model_solution").get<bool>();
        s.temperature = j.at("temperature").get<double>();
        validate_spec(s);
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid prompt spec: ") + e.what());
    }
}

json prompt_to_json(const Prompt& prompt) {
    return {{"text", prompt.text},
            {"spec", spec_to_json(prompt.spec)},
            {"exercise_id", prompt.exercise_id},
            {"code_hash", prompt.code_hash}};
}

Prompt prompt_from_json(const json& j) {
    try {
        return {j.at("text").get<std::string>(), spec_from_json(j.at("spec")), j.at("exercise_id").get<std::string>(),
                j.at("code_hash").get<std::string>()};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid prompt: ") + e.what());
    }
}

} // namespace stap
