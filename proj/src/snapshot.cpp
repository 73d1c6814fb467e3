#include "stap/snapshot.hpp"

#include "stap/error.hpp"
#include "stap/python_syntax.hpp"
#include "stap/util.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace stap {

using nlohmann::json;

const char* to_string(FilterRule rule) {
    switch (rule) {
    case FilterRule::Duplicate: return "duplicate";
    case FilterRule::SyntaxError: return "syntax_error";
    case FilterRule::LineEdit: return "line_edit";
    case FilterRule::TransientPrint: return "transient_print";
    }
    return "unknown";
}

FilterRule filter_rule_from_string(std::string_view name) {
    if (name == "duplicate") return FilterRule::Duplicate;
    if (name == "syntax_error") return FilterRule::SyntaxError;
    if (name == "line_edit") return FilterRule::LineEdit;
    if (name == "transient_print") return FilterRule::TransientPrint;
    throw ParseError("unknown filter rule: " + std::string(name));
}

LogFormat log_format_from_string(std::string_view name) {
    if (name == "csv") return LogFormat::Csv;
    if (name == "jsonl") return LogFormat::Jsonl;
    throw ConfigError("unknown log format: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

// RFC 4180 records. Quoted fields may contain separators, quotes ("") and
// newlines. Returns records with the 1-based physical line each starts on.
std::vector<std::pair<std::vector<std::string>, std::size_t>> parse_csv(std::string_view text) {
    std::vector<std::pair<std::vector<std::string>, std::size_t>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool quoted_field = false;
    std::size_t line = 1;
    std::size_t record_line = 1;
    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
        quoted_field = false;
    };
    auto end_record = [&] {
        end_field();
        bool blank = fields.size() == 1 && fields[0].empty();
        if (!blank) records.emplace_back(std::move(fields), record_line);
        fields.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            if (field_started) {
                throw ParseError("malformed CSV at line " + std::to_string(line) + ": stray quote");
            }
            in_quotes = true;
            field_started = true;
            quoted_field = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
            ++line;
            record_line = line;
        } else {
            if (quoted_field) {
                throw ParseError("malformed CSV at line " + std::to_string(line) + ": text after closing quote");
            }
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw ParseError("malformed CSV: unterminated quoted field starting at line " +
                                    std::to_string(record_line));
    if (field_started || !fields.empty()) end_record();
    return records;
}

template <typename T>
std::optional<T> parse_integer(std::string_view s) {
    s = trim_view(s);
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

std::string row_label(std::size_t row) { return "row " + std::to_string(row); }

void finalize_log(std::vector<Snapshot>& out) {
    std::stable_sort(out.begin(), out.end(),
                     [](const Snapshot& a, const Snapshot& b) { return a.seq_index < b.seq_index; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].seq_index == out[i - 1].seq_index) {
            throw ParseError("duplicate index " + std::to_string(out[i].seq_index));
        }
        if (out[i].timestamp < out[i - 1].timestamp) {
            throw ParseError("timestamp decreases at index " + std::to_string(out[i].seq_index));
        }
    }
}

} // namespace

std::vector<Snapshot> parse_raw_log(std::string_view content, LogFormat format) {
    std::vector<Snapshot> out;
    if (format == LogFormat::Csv) {
        auto records = parse_csv(content);
        if (records.empty()) throw ParseError("schema error: missing header row");
        const auto& header = records.front().first;
        auto column = [&](std::string_view name) -> std::size_t {
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (trim_view(header[i]) == name) return i;
            }
            throw ParseError("schema error: missing column '" + std::string(name) + "'");
        };
        std::size_t ci = column("index"), ct = column("timestamp"), cs = column("source");
        for (std::size_t r = 1; r < records.size(); ++r) {
            const auto& fields = records[r].first;
            if (fields.size() != header.size()) {
                throw ParseError(row_label(r) + ": expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
            }
            auto index = parse_integer<std::uint64_t>(fields[ci]);
            if (!index) throw ParseError(row_label(r) + ": unparseable index '" + fields[ci] + "'");
            auto ts = parse_integer<std::int64_t>(fields[ct]);
            if (!ts) throw ParseError(row_label(r) + ": unparseable timestamp '" + fields[ct] + "'");
            out.push_back({*index, *ts, normalize_newlines(fields[cs])});
        }
    } else {
        std::size_t row = 0;
        std::size_t start = 0;
        while (start <= content.size()) {
            auto nl = content.find('\n', start);
            std::string_view line = content.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
            start = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
            if (trim_view(line).empty()) continue;
            ++row;
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ParseError(row_label(row) + ": invalid JSON (" + e.what() + ")");
            }
            if (!obj.is_object()) throw ParseError(row_label(row) + ": expected a JSON object");
            for (const char* key : {"index", "timestamp", "source"}) {
                if (!obj.contains(key)) {
                    throw ParseError("schema error: " + row_label(row) + " missing key '" + key + "'");
                }
            }
            const auto& idx = obj["index"];
            if (!idx.is_number_unsigned() && !(idx.is_number_integer() && idx.get<std::int64_t>() >= 0)) {
                throw ParseError(row_label(row) + ": unparseable index");
            }
            const auto& ts = obj["timestamp"];
            if (!ts.is_number_integer()) throw ParseError(row_label(row) + ": unparseable timestamp");
            if (!obj["source"].is_string()) throw ParseError(row_label(row) + ": source must be a string");
            out.push_back({idx.get<std::uint64_t>(), ts.get<std::int64_t>(),
                           normalize_newlines(obj["source"].get<std::string>())});
        }
    }
    finalize_log(out);
    return out;
}

std::vector<Snapshot> ingest_raw_log(const std::filesystem::path& path, LogFormat format) {
    if (!std::filesystem::exists(path)) throw ParseError("no such file: " + path.string());
    try {
        return parse_raw_log(read_file(path), format);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Cleaning rules

std::string normalize_source(std::string_view source) {
    auto lines = split_lines(normalize_newlines(source));
    for (auto& l : lines) l = rtrim(l);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

namespace {

std::vector<std::string> normalized_lines(std::string_view source) {
    std::string n = normalize_source(source);
    if (n.empty()) return {};
    return split_lines(n);
}

void record(std::vector<Removal>* removed, const Snapshot& s, FilterRule rule) {
    if (removed != nullptr) removed->push_back({s.seq_index, rule});
}

// Index of the single differing line, or -1 when the pair is not a
// single-line edit. Equal sources count as a zero-line edit (returns -2).
long single_line_edit(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.size() != b.size()) return -1;
    long diff = -2;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            if (diff != -2) return -1;
            diff = static_cast<long>(i);
        }
    }
    return diff;
}

bool is_trace_line(std::string_view line) { return starts_with(trim_view(line), "print("); }

} // namespace

std::vector<Snapshot> dedup(const std::vector<Snapshot>& snapshots, std::vector<Removal>* removed) {
    std::vector<Snapshot> out;
    std::string last;
    for (const auto& s : snapshots) {
        std::string n = normalize_source(s.source);
        if (!out.empty() && n == last) {
            record(removed, s, FilterRule::Duplicate);
            continue;
        }
        last = std::move(n);
        out.push_back(s);
    }
    return out;
}

std::vector<Snapshot> filter_syntax_errors(const std::vector<Snapshot>& snapshots, const SyntaxChecker& checker,
                                           std::vector<Removal>* removed) {
    std::vector<Snapshot> out;
    for (const auto& s : snapshots) {
        if (checker.is_valid(s.source)) {
            out.push_back(s);
        } else {
            record(removed, s, FilterRule::SyntaxError);
        }
    }
    return out;
}

std::vector<Snapshot> collapse_line_edits(const std::vector<Snapshot>& snapshots, std::vector<Removal>* removed) {
    std::vector<Snapshot> out;
    std::vector<std::string> prev_lines;
    long run_line = -1;  // line index edited by the current run, -1 when the run has one member
    for (const auto& s : snapshots) {
        auto lines = normalized_lines(s.source);
        if (!out.empty()) {
            long edit = single_line_edit(prev_lines, lines);
            bool continues = edit == -2 || (edit >= 0 && (run_line == -1 || run_line == edit));
            if (continues) {
                record(removed, out.back(), FilterRule::LineEdit);
                out.back() = s;
                if (edit >= 0) run_line = edit;
                prev_lines = std::move(lines);
                continue;
            }
        }
        out.push_back(s);
        run_line = -1;
        prev_lines = std::move(lines);
    }
    return out;
}

std::vector<Snapshot> remove_transient_prints(const std::vector<Snapshot>& snapshots, std::size_t window,
                                              std::vector<Removal>* removed) {
    if (window == 0) throw ValidationError("trace window must be >= 1");
    const std::size_t n = snapshots.size();
    if (n < 2) return snapshots;

    std::vector<std::vector<std::string>> lines(n);
    std::vector<std::multiset<std::string>> stripped_sets(n);
    for (std::size_t i = 0; i < n; ++i) {
        lines[i] = normalized_lines(snapshots[i].source);
        for (const auto& l : lines[i]) stripped_sets[i].insert(trim(l));
    }
    const auto& final_set = stripped_sets.back();

    // Lines of snapshot i with its transient trace lines removed, and whether any were.
    std::vector<std::vector<std::string>> cleaned(n);
    std::vector<bool> has_transient(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& l : lines[i]) {
            std::string key = trim(l);
            bool transient = false;
            if (is_trace_line(l) && final_set.count(key) == 0) {
                for (std::size_t j = i + 1; j < n && j <= i + window; ++j) {
                    if (stripped_sets[j].count(key) == 0) {
                        transient = true;
                        break;
                    }
                }
            }
            if (transient) {
                has_transient[i] = true;
            } else {
                cleaned[i].push_back(l);
            }
        }
    }

    std::vector<Snapshot> out;
    std::size_t prev_kept = n;  // none
    for (std::size_t i = 0; i < n; ++i) {
        bool drop = false;
        if (has_transient[i] && i + 1 < n) {
            bool same_as_prev = prev_kept != n && cleaned[prev_kept] == cleaned[i];
            bool same_as_next = cleaned[i + 1] == cleaned[i];
            drop = same_as_prev || same_as_next;
        }
        if (drop) {
            record(removed, snapshots[i], FilterRule::TransientPrint);
        } else {
            out.push_back(snapshots[i]);
            prev_kept = i;
        }
    }
    return out;
}

StepSequence build_step_sequence(const std::vector<Snapshot>& raw, std::string student_id, std::string exercise_id,
                                 const SyntaxChecker& checker, const PipelineOptions& options) {
    StepSequence seq;
    seq.student_id = std::move(student_id);
    seq.exercise_id = std::move(exercise_id);
    std::vector<Snapshot> cur = raw;
    while (true) {
        std::size_t before = cur.size();
        cur = dedup(cur, &seq.provenance);
        cur = filter_syntax_errors(cur, checker, &seq.provenance);
        cur = collapse_line_edits(cur, &seq.provenance);
        cur = remove_transient_prints(cur, options.trace_window, &seq.provenance);
        cur = dedup(cur, &seq.provenance);
        if (cur.size() == before) break;
    }
    seq.steps = std::move(cur);
    return seq;
}

// ---------------------------------------------------------------------------
// StepSequence files

std::string step_sequence_to_jsonl(const StepSequence& seq) {
    json prov = json::array();
    for (const auto& r : seq.provenance) prov.push_back({{"index", r.seq_index}, {"rule", to_string(r.rule)}});
    std::string out = json{{"type", "header"},
                           {"student_id", seq.student_id},
                           {"exercise_id", seq.exercise_id},
                           {"provenance", prov}}
                          .dump();
    out.push_back('\n');
    for (const auto& s : seq.steps) {
        out += json{{"type", "step"}, {"index", s.seq_index}, {"timestamp", s.timestamp}, {"source", s.source}}.dump();
        out.push_back('\n');
    }
    return out;
}

StepSequence step_sequence_from_jsonl(std::string_view content) {
    StepSequence seq;
    bool header = false;
    std::size_t row = 0;
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        if (trim_view(line).empty()) continue;
        ++row;
        json obj;
        try {
            obj = json::parse(line);
            std::string type = obj.at("type").get<std::string>();
            if (type == "header") {
                if (header) throw ParseError("duplicate header");
                header = true;
                seq.student_id = obj.at("student_id").get<std::string>();
                seq.exercise_id = obj.at("exercise_id").get<std::string>();
                for (const auto& p : obj.value("provenance", json::array())) {
                    seq.provenance.push_back(
                        {p.at("index").get<std::uint64_t>(), filter_rule_from_string(p.at("rule").get<std::string>())});
                }
            } else if (type == "step") {
                seq.steps.push_back({obj.at("index").get<std::uint64_t>(), obj.at("timestamp").get<std::int64_t>(),
                                     obj.at("source").get<std::string>()});
            } else {
                throw ParseError("unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw ParseError("step sequence row " + std::to_string(row) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError("step sequence row " + std::to_string(row) + ": " + e.what());
        }
    }
    if (!header) throw ParseError("step sequence file has no header record");
    return seq;
}

void write_step_sequence(const std::filesystem::path& path, const StepSequence& seq) {
    write_file(path, step_sequence_to_jsonl(seq));
}

StepSequence read_step_sequence(const std::filesystem::path& path) {
    return step_sequence_from_jsonl(read_file(path));
}

} // namespace stap
