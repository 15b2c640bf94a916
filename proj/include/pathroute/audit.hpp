#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathroute/path_space.hpp"

namespace pathroute {

enum class AnswerMode { MultipleChoice, Open };

// Three-tier compliance check of one raw output:
//   section_ok    every role section required by the path is present
//                 (presence only, order-free; p_A requires none, its whole
//                 output is the answer)
//   pred_answer_ok a final answer parses out of the Answer body: an option
//                 letter for multiple choice, any nonempty text for open
//   strict_ok     the trimmed Answer body is exactly the answer surface form
//                 (a single letter / a single nonempty line)
struct AuditResult {
    bool section_ok = false;
    bool pred_answer_ok = false;
    bool strict_ok = false;
    std::string pred_answer;
};

AuditResult format_audit(std::string_view output, Path path,
                         AnswerMode mode = AnswerMode::MultipleChoice);

// One audited output. `correct` is optional ground truth for the accuracy
// column; `tokens` feeds the average-token column.
struct AuditRow {
    std::string id;
    Path path = Path::A;
    std::string output;
    int64_t tokens = 0;
    std::optional<int> correct;
};

struct PathComplianceRow {
    Path path = Path::A;
    size_t n = 0;
    size_t section_ok = 0;
    size_t pred_ok = 0;
    size_t strict_ok = 0;
    std::optional<double> accuracy;  // present only when every row carries `correct`
    double avg_tokens = 0.0;
};

// Per-path compliance table over a corpus; paths with no rows are omitted.
std::vector<PathComplianceRow> audit_corpus(std::span<const AuditRow> rows, AnswerMode mode);

// JSON-lines: {"id","path","output","tokens","correct"?}
std::vector<AuditRow> read_audit_rows(const std::string& file);
void write_audit_rows(const std::string& file, std::span<const AuditRow> rows);

}  // namespace pathroute
