#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stap {

class SyntaxChecker;

// One saved program state from a keystroke log.
struct Snapshot {
    std::uint64_t seq_index = 0;
    std::int64_t timestamp = 0;  // ms since epoch
    std::string source;

    bool operator==(const Snapshot&) const = default;
};

// Which cleaning rule dropped which raw indices.
enum class FilterRule { Duplicate, SyntaxError, LineEdit, TransientPrint };

const char* to_string(FilterRule rule);
FilterRule filter_rule_from_string(std::string_view name);

struct Removal {
    std::uint64_t seq_index = 0;
    FilterRule rule = FilterRule::Duplicate;

    bool operator==(const Removal&) const = default;
};

struct StepSequence {
    std::string student_id;
    std::string exercise_id;
    std::vector<Snapshot> steps;
    std::vector<Removal> provenance;
};

enum class LogFormat { Csv, Jsonl };

LogFormat log_format_from_string(std::string_view name);

// Reads a raw keystroke log. Columns/keys: index, timestamp, source. Output is
// sorted by seq_index with CRLF/CR normalised to LF. Throws ParseError naming
// the offending row (1-based data row) or the missing column.
std::vector<Snapshot> ingest_raw_log(const std::filesystem::path& path, LogFormat format);
std::vector<Snapshot> parse_raw_log(std::string_view content, LogFormat format);

// Per-line trailing whitespace stripped, trailing blank lines dropped, LF only.
std::string normalize_source(std::string_view source);

// Drops every snapshot whose normalized source equals that of the previous
// retained one. The first snapshot always survives.
std::vector<Snapshot> dedup(const std::vector<Snapshot>& snapshots,
                            std::vector<Removal>* removed = nullptr);

std::vector<Snapshot> filter_syntax_errors(const std::vector<Snapshot>& snapshots, const SyntaxChecker& checker,
                                           std::vector<Removal>* removed = nullptr);

// Keeps only the last snapshot of each maximal run in which consecutive
// states differ in exactly one common line index with equal line counts.
std::vector<Snapshot> collapse_line_edits(const std::vector<Snapshot>& snapshots,
                                          std::vector<Removal>* removed = nullptr);

inline constexpr std::size_t default_trace_window = 5;

// A trace line is a line whose stripped text starts with `print(`. It is
// transient in snapshot i when it is absent from the final snapshot and
// disappears in at least one of the next `window` snapshots. A snapshot (never
// the last) is dropped when it contains a transient trace line and, with its
// transient trace lines removed, equals the previous retained snapshot or the
// next snapshot treated the same way.
std::vector<Snapshot> remove_transient_prints(const std::vector<Snapshot>& snapshots,
                                              std::size_t window = default_trace_window,
                                              std::vector<Removal>* removed = nullptr);

struct PipelineOptions {
    std::size_t trace_window = default_trace_window;
};

// dedup -> syntax filter -> line-edit collapse -> transient prints -> dedup,
// repeated until a pass removes nothing, so the result is a fixpoint.
StepSequence build_step_sequence(const std::vector<Snapshot>& raw, std::string student_id,
                                 std::string exercise_id, const SyntaxChecker& checker,
                                 const PipelineOptions& options = {});

// JSONL: a header object {"type":"header", student_id, exercise_id,
// provenance:[{index, rule}]} followed by one {"type":"step", index,
// timestamp, source} object per step.
std::string step_sequence_to_jsonl(const StepSequence& seq);
StepSequence step_sequence_from_jsonl(std::string_view content);
void write_step_sequence(const std::filesystem::path& path, const StepSequence& seq);
StepSequence read_step_sequence(const std::filesystem::path& path);

} // namespace stap
