#include "pathroute/audit.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "pathroute/errors.hpp"

namespace pathroute {

using nlohmann::json;

namespace {

std::string trimmed(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool line_is_header(std::string_view line, std::string_view header) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line.size() == header.size() + 1 && line.substr(0, header.size()) == header &&
           line.back() == ':';
}

// Body of the answer: text after the "Answer:" header line, or the whole
// output for p_A (whose prompt carries no section template).
std::optional<std::string> answer_body(std::string_view output, Path path) {
    if (path == Path::A) return std::string(output);
    size_t pos = 0;
    std::optional<size_t> start;
    while (pos <= output.size()) {
        size_t nl = output.find('\n', pos);
        std::string_view line =
            output.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        if (start) {
            // answer runs to the end of the output
        } else if (line_is_header(line, "Answer")) {
            start = nl == std::string_view::npos ? output.size() : nl + 1;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (!start) return std::nullopt;
    return std::string(output.substr(*start));
}

bool is_single_letter(std::string_view s) {
    return s.size() == 1 && s[0] >= 'A' && s[0] <= 'Z';
}

// Last standalone capital letter in the body, the usual answer surface.
std::optional<char> extract_option_letter(std::string_view body) {
    std::optional<char> found;
    size_t i = 0;
    while (i < body.size()) {
        if (std::isalnum(static_cast<unsigned char>(body[i]))) {
            size_t j = i;
            while (j < body.size() && std::isalnum(static_cast<unsigned char>(body[j]))) ++j;
            if (j - i == 1 && body[i] >= 'A' && body[i] <= 'Z') found = body[i];
            i = j;
        } else {
            ++i;
        }
    }
    return found;
}

}  // namespace

AuditResult format_audit(std::string_view output, Path path, AnswerMode mode) {
    AuditResult res;

    // Section presence for every distinct header the path requires.
    if (path == Path::A) {
        res.section_ok = true;
    } else {
        std::set<std::string_view> required;
        for (Role r : role_sequence(path)) required.insert(role_header(r));
        std::set<std::string_view> seen;
        size_t pos = 0;
        while (pos <= output.size()) {
            size_t nl = output.find('\n', pos);
            std::string_view line =
                output.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
            for (auto header : required)
                if (line_is_header(line, header)) seen.insert(header);
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
        res.section_ok = seen.size() == required.size();
    }

    auto body = answer_body(output, path);
    if (!body) return res;  // no Answer section: nothing parses
    const std::string t = trimmed(*body);

    if (mode == AnswerMode::MultipleChoice) {
        auto letter = extract_option_letter(t);
        res.pred_answer_ok = letter.has_value();
        if (letter) res.pred_answer = std::string(1, *letter);
        res.strict_ok = is_single_letter(t);
    } else {
        res.pred_answer_ok = !t.empty();
        res.pred_answer = t;
        res.strict_ok = !t.empty() && t.find('\n') == std::string::npos;
    }
    return res;
}

std::vector<PathComplianceRow> audit_corpus(std::span<const AuditRow> rows, AnswerMode mode) {
    struct Group {
        size_t n = 0, section = 0, pred = 0, strict = 0, correct = 0;
        bool all_have_truth = true;
        int64_t token_sum = 0;
    };
    std::array<Group, kNumPaths> groups;
    for (const auto& row : rows) {
        Group& g = groups[static_cast<size_t>(path_index(row.path))];
        AuditResult a = format_audit(row.output, row.path, mode);
        ++g.n;
        g.section += a.section_ok;
        g.pred += a.pred_answer_ok;
        g.strict += a.strict_ok;
        g.token_sum += row.tokens;
        if (row.correct)
            g.correct += static_cast<size_t>(*row.correct != 0);
        else
            g.all_have_truth = false;
    }

    std::vector<PathComplianceRow> table;
    for (Path p : all_paths()) {
        const Group& g = groups[static_cast<size_t>(path_index(p))];
        if (g.n == 0) continue;  // empty per-path groups are omitted
        PathComplianceRow row;
        row.path = p;
        row.n = g.n;
        row.section_ok = g.section;
        row.pred_ok = g.pred;
        row.strict_ok = g.strict;
        if (g.all_have_truth)
            row.accuracy = static_cast<double>(g.correct) / static_cast<double>(g.n);
        row.avg_tokens = static_cast<double>(g.token_sum) / static_cast<double>(g.n);
        table.push_back(row);
    }
    return table;
}

std::vector<AuditRow> read_audit_rows(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    std::vector<AuditRow> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": not valid JSON");
        try {
            AuditRow r;
            r.id = j.at("id").get<std::string>();
            auto p = parse_path(j.at("path").get<std::string>());
            if (!p) throw InvalidInput("unknown path");
            r.path = *p;
            r.output = j.at("output").get<std::string>();
            r.tokens = j.value("tokens", int64_t{0});
            if (j.contains("correct")) r.correct = j.at("correct").get<int>();
            rows.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

void write_audit_rows(const std::string& file, std::span<const AuditRow> rows) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    for (const auto& r : rows) {
        json j{{"id", r.id}, {"path", path_name(r.path)}, {"output", r.output},
               {"tokens", r.tokens}};
        if (r.correct) j["correct"] = *r.correct;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + file);
}

}  // namespace pathroute
