#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace stap {

struct RankingEntry {
    std::string program_id;
    std::map<std::string, int> ranks;  // prompt id -> 1 (best) .. 3 (worst); ties allowed
};

struct RankingSheet {
    std::string exercise_id;
    std::vector<RankingEntry> entries;
};

struct PromptScore {
    std::map<std::string, long long> per_exercise;
    long long total = 0;
    bool winner = false;  // unique lowest total
};

struct RankingResult {
    std::map<std::string, PromptScore> scores;
    std::vector<std::string> best;  // prompts sharing the lowest total; size > 1 is a tie
    bool tie() const { return best.size() > 1; }
};

// Sums ranks per prompt. ValidationError for ranks outside 1..3, an entry
// that does not rank the full prompt set, or sheets over different sets.
RankingResult aggregate_ranking(const std::vector<RankingSheet>& sheets);

RankingSheet ranking_sheet_from_json(const nlohmann::json& j);
nlohmann::json ranking_sheet_to_json(const RankingSheet& sheet);
// Every *.json file in `dir`, sorted by name.
std::vector<RankingSheet> load_ranking_sheets(const std::filesystem::path& dir);

nlohmann::json ranking_result_to_json(const RankingResult& result);

} // namespace stap
