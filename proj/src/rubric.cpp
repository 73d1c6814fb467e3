#include "stap/rubric.hpp"

#include "stap/error.hpp"
#include "stap/util.hpp"

#include <algorithm>

namespace stap {

using nlohmann::json;

namespace {

const std::vector<std::string> feedback_types = {"task_constraints", "concepts", "mistakes", "how_to_proceed",
                                                 "meta_cognition"};
const std::vector<std::string> information_kinds = {"compliment", "tip", "explanation"};
const std::vector<std::string> detail_levels = {"bottom_out", "high_level"};
const std::vector<std::string> tones = {"direct", "neutral", "friendly"};
const std::vector<std::string> no_domain;

const std::vector<std::string> boolean_criteria = {"personalised", "appropriate", "specific", "misleading"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

[[noreturn]] void fail(const std::string& where, const std::string& criterion, const std::string& what) {
    throw ValidationError(where + ": criterion '" + criterion + "' " + what);
}

const json& require(const json& j, const std::string& where, const std::string& criterion) {
    auto it = j.find(criterion);
    if (it == j.end() || it->is_null()) fail(where, criterion, "is missing");
    return *it;
}

std::string enum_value(const json& j, const std::string& where, const std::string& criterion) {
    const json& v = require(j, where, criterion);
    const auto& domain = criterion_domain(criterion);
    if (!v.is_string() || !contains(domain, v.get<std::string>())) {
        fail(where, criterion, "has illegal value " + v.dump());
    }
    return v.get<std::string>();
}

bool bool_value(const json& j, const std::string& where, const std::string& criterion) {
    const json& v = require(j, where, criterion);
    if (!v.is_boolean()) fail(where, criterion, "has illegal value " + v.dump() + " (expected true or false)");
    return v.get<bool>();
}

} // namespace

const std::vector<std::string>& rubric_criteria() {
    static const std::vector<std::string> names = {"feedback_type", "information", "level_of_detail",
                                                   "personalised",  "appropriate", "specific",
                                                   "misleading",    "tone",        "length_sentences"};
    return names;
}

const std::vector<std::string>& criterion_domain(std::string_view criterion) {
    if (criterion == "feedback_type") return feedback_types;
    if (criterion == "information") return information_kinds;
    if (criterion == "level_of_detail") return detail_levels;
    if (criterion == "tone") return tones;
    return no_domain;
}

RubricAnnotation annotation_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": annotation must be a JSON object");
    RubricAnnotation a;
    if (!j.contains("hint_id") || !j["hint_id"].is_string() || j["hint_id"].get<std::string>().empty()) {
        throw ValidationError(where + ": field 'hint_id' is missing");
    }
    a.hint_id = j["hint_id"].get<std::string>();
    const std::string at = where + " (hint " + a.hint_id + ")";
    if (j.contains("annotator_id")) {
        if (!j["annotator_id"].is_string()) throw ValidationError(at + ": field 'annotator_id' must be a string");
        a.annotator_id = j["annotator_id"].get<std::string>();
    }
    for (const auto& [key, value] : j.items()) {
        if (key != "hint_id" && key != "annotator_id" && !contains(rubric_criteria(), key)) {
            throw ValidationError(at + ": unknown field '" + key + "'");
        }
    }

    a.feedback_type = enum_value(j, at, "feedback_type");

    const json& info = require(j, at, "information");
    if (!info.is_array()) fail(at, "information", "must be a list");
    for (const auto& item : info) {
        if (!item.is_string() || !contains(information_kinds, item.get<std::string>())) {
            fail(at, "information", "has illegal value " + item.dump());
        }
        a.information.push_back(item.get<std::string>());
    }
    std::sort(a.information.begin(), a.information.end());
    if (std::adjacent_find(a.information.begin(), a.information.end()) != a.information.end()) {
        fail(at, "information", "lists a value twice");
    }

    a.level_of_detail = enum_value(j, at, "level_of_detail");
    a.personalised = bool_value(j, at, "personalised");
    a.appropriate = bool_value(j, at, "appropriate");
    a.specific = bool_value(j, at, "specific");
    a.misleading = bool_value(j, at, "misleading");
    a.tone = enum_value(j, at, "tone");

    const json& len = require(j, at, "length_sentences");
    if (!len.is_number_integer() || len.get<long long>() < 1 || len.get<long long>() > 1000) {
        fail(at, "length_sentences", "has illegal value " + len.dump() + " (expected a positive integer)");
    }
    a.length_sentences = len.get<int>();
    return a;
}

json annotation_to_json(const RubricAnnotation& a) {
    return {{"hint_id", a.hint_id},
            {"annotator_id", a.annotator_id},
            {"feedback_type", a.feedback_type},
            {"information", a.information},
            {"level_of_detail", a.level_of_detail},
            {"personalised", a.personalised},
            {"appropriate", a.appropriate},
            {"specific", a.specific},
            {"misleading", a.misleading},
            {"tone", a.tone},
            {"length_sentences", a.length_sentences}};
}

std::string criterion_label(const RubricAnnotation& a, std::string_view criterion) {
    if (criterion == "feedback_type") return a.feedback_type;
    if (criterion == "information") {
        std::string out;
        for (const auto& i : a.information) {
            if (!out.empty()) out.push_back('+');
            out += i;
        }
        return out;
    }
    if (criterion == "level_of_detail") return a.level_of_detail;
    if (criterion == "personalised") return a.personalised ? "true" : "false";
    if (criterion == "appropriate") return a.appropriate ? "true" : "false";
    if (criterion == "specific") return a.specific ? "true" : "false";
    if (criterion == "misleading") return a.misleading ? "true" : "false";
    if (criterion == "tone") return a.tone;
    if (criterion == "length_sentences") return std::to_string(a.length_sentences);
    throw ValidationError("unknown criterion '" + std::string(criterion) + "'");
}

std::string information_combination(const std::vector<std::string>& information) {
    std::string out;
    for (const auto& [name, letter] : {std::pair{"compliment", "C"}, {"tip", "T"}, {"explanation", "E"}}) {
        if (contains(information, name)) {
            if (!out.empty()) out.push_back('&');
            out += letter;
        }
    }
    return out.empty() ? "none" : out;
}

void AnnotationStore::add(RubricAnnotation a) {
    auto key = std::make_pair(a.hint_id, a.annotator_id);
    if (keys_.count(key)) {
        throw ConflictError("hint " + a.hint_id + " already annotated by '" + a.annotator_id + "'");
    }
    keys_.insert(key);
    items_.push_back(std::move(a));
}

std::vector<RubricAnnotation> AnnotationStore::by_annotator(const std::string& annotator_id) const {
    std::vector<RubricAnnotation> out;
    for (const auto& a : items_) {
        if (a.annotator_id == annotator_id) out.push_back(a);
    }
    return out;
}

void annotate(AnnotationStore& store, const std::set<std::string>& known_hints, const std::string& annotator_id,
              std::string_view entries_jsonl) {
    if (annotator_id.empty()) throw ValidationError("annotator id must be non-empty");
    std::size_t line_no = 0;
    for (const auto& line : split_lines(entries_jsonl)) {
        ++line_no;
        if (trim_view(line).empty()) continue;
        const std::string where = "entry " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(where + ": malformed JSON: " + e.what());
        }
        RubricAnnotation a = annotation_from_json(j, where);
        if (a.annotator_id.empty()) a.annotator_id = annotator_id;
        if (a.annotator_id != annotator_id) {
            throw ValidationError(where + " (hint " + a.hint_id + "): annotator '" + a.annotator_id +
                                  "' does not match '" + annotator_id + "'");
        }
        if (!known_hints.count(a.hint_id)) {
            throw ValidationError(where + ": unknown hint_id '" + a.hint_id + "'");
        }
        store.add(std::move(a));
    }
}

std::set<std::string> hint_ids_from_jsonl(std::string_view content) {
    std::set<std::string> out;
    for (const auto& line : split_lines(content)) {
        if (trim_view(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed hints file: ") + e.what());
        }
        if (j.contains("hint_id") && j["hint_id"].is_string()) {
            out.insert(j["hint_id"].get<std::string>());
        } else if (j.contains("kind") && j["kind"] == "hint_issued") {
            out.insert(j.at("payload").at("hint_id").get<std::string>());
        }
    }
    return out;
}

std::vector<RubricAnnotation> annotations_from_jsonl(std::string_view content) {
    std::vector<RubricAnnotation> out;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim_view(line).empty()) continue;
        try {
            out.push_back(annotation_from_json(json::parse(line), "entry " + std::to_string(line_no)));
        } catch (const json::parse_error& e) {
            throw ValidationError("entry " + std::to_string(line_no) + ": malformed JSON: " + e.what());
        }
    }
    return out;
}

std::string annotations_to_jsonl(const std::vector<RubricAnnotation>& items) {
    std::string out;
    for (const auto& a : items) {
        out += annotation_to_json(a).dump();
        out.push_back('\n');
    }
    return out;
}

RubricReport rubric_report(const std::vector<RubricAnnotation>& annotations) {
    RubricReport r;
    r.n = annotations.size();
    for (const auto& a : annotations) {
        ++r.tables["feedback_type"][a.feedback_type];
        ++r.tables["level_of_detail"][a.level_of_detail];
        ++r.tables["tone"][a.tone];
        for (const auto& c : boolean_criteria) ++r.tables[c][criterion_label(a, c)];
        ++r.tables["length_sentences"][std::to_string(a.length_sentences)];
        ++r.information_combinations[information_combination(a.information)];
    }
    return r;
}

json rubric_report_to_json(const RubricReport& report) {
    return {{"n", report.n}, {"tables", report.tables}, {"information_combinations", report.information_combinations}};
}

std::string rubric_report_csv(const RubricReport& report) {
    std::string out = "criterion,value,count\n";
    for (const auto& [criterion, table] : report.tables) {
        for (const auto& [value, count] : table) out += criterion + "," + value + "," + std::to_string(count) + "\n";
    }
    for (const auto& [combo, count] : report.information_combinations) {
        out += "information," + combo + "," + std::to_string(count) + "\n";
    }
    return out;
}

} // namespace stap
