#include "stap/ratings.hpp"

#include "stap/error.hpp"
#include "stap/hint_service.hpp"
#include "stap/util.hpp"

#include <cstdio>

namespace stap {

using nlohmann::json;

std::size_t LikertHistogram::total() const {
    std::size_t t = 0;
    for (auto b : bins) t += b;
    return t;
}

RatingReport rating_report(std::string_view events_jsonl) {
    RatingReport r;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(events_jsonl)) {
        ++line_no;
        if (trim_view(line).empty()) continue;
        SessionEvent e;
        try {
            e = SessionEvent::from_json(json::parse(line));
        } catch (const json::parse_error& ex) {
            throw ParseError("line " + std::to_string(line_no) + ": " + ex.what());
        } catch (const ParseError& ex) {
            throw ParseError("line " + std::to_string(line_no) + ": " + ex.what());
        }
        auto& counts = r.sessions[e.session_id];
        try {
            switch (e.kind) {
            case EventKind::SessionStarted:
                counts.participant_alias = e.payload.at("participant_alias").get<std::string>();
                break;
            case EventKind::HintIssued:
                ++counts.hints;
                break;
            case EventKind::HintRated: {
                HintRating rating{e.payload.at("hint_id").get<std::string>(), e.payload.at("clear").get<int>(),
                                  e.payload.at("fits").get<int>(), e.payload.at("helpful").get<int>(), {}};
                validate_rating(rating);
                ++r.clear.bins[static_cast<std::size_t>(rating.clear - 1)];
                ++r.fits.bins[static_cast<std::size_t>(rating.fits - 1)];
                ++r.helpful.bins[static_cast<std::size_t>(rating.helpful - 1)];
                ++counts.rated;
                ++r.n;
                break;
            }
            case EventKind::SnapshotLogged:
            case EventKind::SolutionChecked:
                break;
            }
        } catch (const json::exception& ex) {
            throw ParseError("line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return r;
}

namespace {

const std::array<std::pair<const char*, LikertHistogram RatingReport::*>, 3> statements = {{
    {"clear", &RatingReport::clear},
    {"fits", &RatingReport::fits},
    {"helpful", &RatingReport::helpful},
}};

} // namespace

json rating_report_to_json(const RatingReport& report) {
    json hist = json::object();
    for (const auto& [name, member] : statements) hist[name] = (report.*member).bins;
    json sessions = json::object();
    for (const auto& [id, c] : report.sessions) {
        sessions[id] = {{"participant_alias", c.participant_alias}, {"hints", c.hints}, {"rated", c.rated}};
    }
    return {{"n", report.n}, {"histograms", hist}, {"sessions", sessions}};
}

std::string rating_histogram_csv(const RatingReport& report) {
    std::string out = "statement,1,2,3,4,5,n\n";
    for (const auto& [name, member] : statements) {
        const auto& h = report.*member;
        out += name;
        for (auto b : h.bins) out += "," + std::to_string(b);
        out += "," + std::to_string(h.total()) + "\n";
    }
    return out;
}

std::string rating_plot_data(const RatingReport& report) {
    std::string out = "statement,score,count,fraction\n";
    for (const auto& [name, member] : statements) {
        const auto& h = report.*member;
        for (std::size_t k = 0; k < h.bins.size(); ++k) {
            char frac[32];
            double f = h.total() ? static_cast<double>(h.bins[k]) / static_cast<double>(h.total()) : 0.0;
            std::snprintf(frac, sizeof frac, "%.4f", f);
            out += std::string(name) + "," + std::to_string(k + 1) + "," + std::to_string(h.bins[k]) + "," + frac + "\n";
        }
    }
    return out;
}

std::string hints_per_session_csv(const RatingReport& report) {
    std::string out = "session_id,participant_alias,hints,rated\n";
    for (const auto& [id, c] : report.sessions) {
        out += id + "," + c.participant_alias + "," + std::to_string(c.hints) + "," + std::to_string(c.rated) + "\n";
    }
    return out;
}

void write_rating_report(const RatingReport& report, const std::filesystem::path& out_dir) {
    write_file(out_dir / "ratings.csv", rating_histogram_csv(report));
    write_file(out_dir / "ratings_plot.csv", rating_plot_data(report));
    write_file(out_dir / "hints_per_session.csv", hints_per_session_csv(report));
    write_file(out_dir / "ratings.json", rating_report_to_json(report).dump(2) + "\n");
}

} // namespace stap
