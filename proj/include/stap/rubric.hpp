#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace stap {

struct RubricAnnotation {
    std::string hint_id;
    std::string annotator_id;
    std::string feedback_type;             // task_constraints, concepts, mistakes, how_to_proceed, meta_cognition
    std::vector<std::string> information;  // sorted subset of compliment, tip, explanation
    std::string level_of_detail;           // bottom_out, high_level
    bool personalised = false;
    bool appropriate = false;
    bool specific = false;
    bool misleading = false;
    std::string tone;  // direct, neutral, friendly
    int length_sentences = 1;
};

// The nine criteria, in sheet order.
const std::vector<std::string>& rubric_criteria();
const std::vector<std::string>& criterion_domain(std::string_view criterion);  // empty for booleans/integers

// Validates one entry. Errors are ValidationErrors of the form
//   "<where>: criterion 'tone' is missing" / "... has illegal value ..."
RubricAnnotation annotation_from_json(const nlohmann::json& j, const std::string& where = "entry");
nlohmann::json annotation_to_json(const RubricAnnotation& a);

// The label a criterion contributes to agreement statistics. Information
// sets are canonical: "compliment+tip", "" for the empty set.
std::string criterion_label(const RubricAnnotation& a, std::string_view criterion);

// "C", "T", "E" joined with '&' in that order ("C&T", "T&E"); "none" when empty.
std::string information_combination(const std::vector<std::string>& information);

class AnnotationStore {
public:
    // ConflictError when (hint_id, annotator_id) is already present.
    void add(RubricAnnotation a);
    const std::vector<RubricAnnotation>& all() const { return items_; }
    std::size_t size() const { return items_.size(); }
    std::vector<RubricAnnotation> by_annotator(const std::string& annotator_id) const;

private:
    std::vector<RubricAnnotation> items_;
    std::set<std::pair<std::string, std::string>> keys_;
};

// Parses a JSONL sheet of entries written by `annotator_id`. Entries must
// reference a hint in `known_hints`; an entry that names a different
// annotator is rejected. Errors name the entry by line and hint id.
void annotate(AnnotationStore& store, const std::set<std::string>& known_hints, const std::string& annotator_id,
              std::string_view entries_jsonl);

// Hint ids of an experiment-records or hint-event JSONL file.
std::set<std::string> hint_ids_from_jsonl(std::string_view content);

std::vector<RubricAnnotation> annotations_from_jsonl(std::string_view content);
std::string annotations_to_jsonl(const std::vector<RubricAnnotation>& items);

struct RubricReport {
    std::size_t n = 0;
    std::map<std::string, std::map<std::string, std::size_t>> tables;  // criterion -> value -> count
    std::map<std::string, std::size_t> information_combinations;
};

RubricReport rubric_report(const std::vector<RubricAnnotation>& annotations);
nlohmann::json rubric_report_to_json(const RubricReport& report);
// criterion,value,count rows.
std::string rubric_report_csv(const RubricReport& report);

} // namespace stap
