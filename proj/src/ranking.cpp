#include "stap/ranking.hpp"

#include "stap/error.hpp"
#include "stap/util.hpp"

#include <algorithm>
#include <set>

namespace stap {

using nlohmann::json;

namespace {

std::set<std::string> prompt_set(const RankingEntry& e) {
    std::set<std::string> out;
    for (const auto& [id, rank] : e.ranks) out.insert(id);
    return out;
}

std::string describe(const RankingSheet& s, const RankingEntry& e) {
    return "sheet '" + s.exercise_id + "' entry '" + e.program_id + "'";
}

} // namespace

RankingResult aggregate_ranking(const std::vector<RankingSheet>& sheets) {
    if (sheets.empty()) throw ValidationError("no ranking sheets given");
    std::set<std::string> prompts;
    bool have_prompts = false;
    RankingResult result;
    for (const auto& sheet : sheets) {
        if (sheet.entries.empty()) throw ValidationError("sheet '" + sheet.exercise_id + "' has no entries");
        for (const auto& entry : sheet.entries) {
            auto ids = prompt_set(entry);
            if (!have_prompts) {
                if (ids.empty()) throw ValidationError(describe(sheet, entry) + " ranks no prompts");
                prompts = ids;
                have_prompts = true;
            } else if (ids != prompts) {
                throw ValidationError(describe(sheet, entry) + " does not rank the same prompt set");
            }
            for (const auto& [id, rank] : entry.ranks) {
                if (rank < 1 || rank > 3) {
                    throw ValidationError(describe(sheet, entry) + ": rank for '" + id + "' must be 1, 2 or 3");
                }
                auto& score = result.scores[id];
                score.per_exercise[sheet.exercise_id] += rank;
                score.total += rank;
            }
        }
    }
    long long best = std::min_element(result.scores.begin(), result.scores.end(), [](const auto& a, const auto& b) {
                         return a.second.total < b.second.total;
                     })->second.total;
    for (const auto& [id, score] : result.scores) {
        if (score.total == best) result.best.push_back(id);
    }
    if (result.best.size() == 1) result.scores[result.best.front()].winner = true;
    return result;
}

RankingSheet ranking_sheet_from_json(const json& j) {
    try {
        RankingSheet s;
        s.exercise_id = j.at("exercise_id").get<std::string>();
        for (const auto& e : j.at("entries")) {
            RankingEntry entry;
            entry.program_id = e.at("program_id").get<std::string>();
            for (const auto& [id, rank] : e.at("ranks").items()) {
                if (!rank.is_number_integer()) {
                    throw ValidationError("entry '" + entry.program_id + "': rank for '" + id + "' must be an integer");
                }
                entry.ranks[id] = rank.get<int>();
            }
            s.entries.push_back(std::move(entry));
        }
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed ranking sheet: ") + e.what());
    }
}

json ranking_sheet_to_json(const RankingSheet& sheet) {
    json entries = json::array();
    for (const auto& e : sheet.entries) entries.push_back({{"program_id", e.program_id}, {"ranks", e.ranks}});
    return {{"exercise_id", sheet.exercise_id}, {"entries", entries}};
}

std::vector<RankingSheet> load_ranking_sheets(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RankingSheet> sheets;
    for (const auto& f : files) {
        try {
            sheets.push_back(ranking_sheet_from_json(json::parse(read_file(f))));
        } catch (const json::parse_error& e) {
            throw ValidationError(f.string() + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(f.string() + ": " + e.what());
        }
    }
    return sheets;
}

json ranking_result_to_json(const RankingResult& result) {
    json scores = json::object();
    for (const auto& [id, s] : result.scores) {
        scores[id] = {{"per_exercise", s.per_exercise}, {"total", s.total}, {"winner", s.winner}};
    }
    return {{"scores", scores}, {"best", result.best}, {"tie", result.tie()}};
}

} // namespace stap
