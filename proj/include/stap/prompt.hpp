#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace stap {

struct Exercise;

// The instruction phrasings explored for next-step hints. i-iii are the first
// round; iv and v are the shortened variants of the second round.
enum class Instruction { I, II, III, IV, V };

std::string_view instruction_id(Instruction instruction);  // "i" .. "v"
std::string_view instruction_text(Instruction instruction);
Instruction instruction_from_id(std::string_view id);
const std::vector<Instruction>& all_instructions();

struct AttributeCombo {
    bool include_description = false;
    bool include_model_solution = false;

    bool operator==(const AttributeCombo&) const = default;
};

// None, description only, solution only, both.
std::vector<AttributeCombo> all_attribute_combos();

struct PromptSpec {
    Instruction instruction = Instruction::V;
    bool include_description = true;
    bool include_model_solution = false;
    double temperature = 0.5;

    bool operator==(const PromptSpec&) const = default;

    // Stable short identifier, e.g. "v-d1-s0-t0.5".
    std::string id() const;
};

// Instruction v, description only, temperature 0.5.
PromptSpec default_spec();

// 0.1, 0.3, 0.5, 0.7, 0.9.
std::vector<double> temperature_grid();

// Throws ValidationError for a temperature outside [0, 1].
void validate_spec(const PromptSpec& spec);

// Instruction-major cartesian product. Every combo/temperature uses the
// temperature of default_spec(); use the overload to sweep temperatures.
std::vector<PromptSpec> enumerate_matrix(const std::vector<Instruction>& instructions,
                                         const std::vector<AttributeCombo>& combos);
std::vector<PromptSpec> enumerate_matrix(const std::vector<Instruction>& instructions,
                                         const std::vector<double>& temperatures,
                                         AttributeCombo combo = {true, false});

struct Prompt {
    std::string text;
    PromptSpec spec;
    std::string exercise_id;
    std::string code_hash;  // hex FNV-1a of the student code
};

// Sections in fixed order, separated by blank lines:
//   Problem description:   (optional)
//   Model solution:        (optional, fenced)
//   Student code:          (fenced)
//   <instruction text>
std::string render_prompt_text(const PromptSpec& spec, const Exercise& exercise, std::string_view student_code);
Prompt render_prompt(const PromptSpec& spec, const Exercise& exercise, std::string_view student_code);

nlohmann::json spec_to_json(const PromptSpec& spec);
PromptSpec spec_from_json(const nlohmann::json& j);
nlohmann::json prompt_to_json(const Prompt& prompt);
Prompt prompt_from_json(const nlohmann::json& j);

} // namespace stap
