#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathroute/path_space.hpp"

namespace pathroute {

// One tagged role span. visual_refs name the reference visual summaries a
// Construction/Hypothesis span is supervised against (a Hypothesis span may
// carry several candidates); they are only legal on those two roles.
struct Segment {
    Role role;
    std::string text;
    std::vector<std::string> visual_refs;

    bool operator==(const Segment&) const = default;
};

struct Trajectory {
    std::string id;
    std::string query;
    Path path = Path::A;
    std::vector<Segment> segments;

    bool operator==(const Trajectory&) const = default;
};

enum class TrajectoryErrorKind {
    MissingSection,
    OrderViolation,
    DuplicateHeader,
    EmptyAnswer,
    IllegalVisualRef,
};

struct TrajectoryError {
    TrajectoryErrorKind kind;
    std::string detail;
};

std::string_view trajectory_error_name(TrajectoryErrorKind k);

struct ParseResult {
    std::vector<Segment> segments;  // in order of appearance, even on error
    std::vector<TrajectoryError> errors;
    bool ok() const { return errors.empty(); }
};

// Splits tagged text into role segments. A header is a line that is exactly
// "<Header>:" at column 0 ("Understanding", "Reasoning", "Visual",
// "Hypothesis", "Answer"; case-sensitive). Segment text runs to the next
// header; runs of blank lines around it are tolerated and stripped. Content
// before the first header is ignored. The header sequence must equal the
// path's role sequence; violations are reported all at once as
// MissingSection / DuplicateHeader / OrderViolation.
ParseResult parse_trajectory(std::string_view text, Path path);

// Canonical tagged-text form: "<Header>:\n<text>\n" blocks separated by one
// blank line. The role order must match some path's role sequence. Visual
// reference ids are metadata of the JSON form and are not rendered.
std::string render_trajectory(std::span<const Segment> segments);

// Checks role order against the path, nonempty Answer text, and visual_ref
// legality. Collects every violation instead of stopping at the first.
std::vector<TrajectoryError> validate_trajectory(const Trajectory& t);

// JSON-lines corpus: {"id","query","path","segments":[{"role","text","visual_refs"}]}
std::vector<Trajectory> read_trajectory_corpus(const std::string& file);
void write_trajectory_corpus(const std::string& file, std::span<const Trajectory> corpus);
std::string trajectory_to_json_line(const Trajectory& t);
Trajectory trajectory_from_json_line(std::string_view line);

// Single-trajectory text file; the path is inferred from the header sequence
// and the id defaults to the file stem. The text form has no query field.
Trajectory read_trajectory_file(const std::string& file);

}  // namespace pathroute
