#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

namespace stap {

struct LikertHistogram {
    std::array<std::size_t, 5> bins{};  // bins[k] counts score k + 1

    std::size_t total() const;
};

struct SessionCounts {
    std::string participant_alias;
    std::size_t hints = 0;
    std::size_t rated = 0;
};

struct RatingReport {
    std::size_t n = 0;  // rated hints
    LikertHistogram clear;
    LikertHistogram fits;
    LikertHistogram helpful;
    std::map<std::string, SessionCounts> sessions;  // by session id
};

// Folds an event export (hint service JSONL) into histograms.
RatingReport rating_report(std::string_view events_jsonl);

nlohmann::json rating_report_to_json(const RatingReport& report);
// statement,1,2,3,4,5,n
std::string rating_histogram_csv(const RatingReport& report);
// statement,score,count,fraction in long form for plotting tools.
std::string rating_plot_data(const RatingReport& report);
// session_id,participant_alias,hints,rated
std::string hints_per_session_csv(const RatingReport& report);

// ratings.csv, ratings_plot.csv, hints_per_session.csv and ratings.json.
void write_rating_report(const RatingReport& report, const std::filesystem::path& out_dir);

} // namespace stap
