#include "pathroute/trajectory.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pathroute/errors.hpp"

namespace pathroute {

using nlohmann::json;

std::string_view trajectory_error_name(TrajectoryErrorKind k) {
    switch (k) {
        case TrajectoryErrorKind::MissingSection: return "MissingSection";
        case TrajectoryErrorKind::OrderViolation: return "OrderViolation";
        case TrajectoryErrorKind::DuplicateHeader: return "DuplicateHeader";
        case TrajectoryErrorKind::EmptyAnswer: return "EmptyAnswer";
        case TrajectoryErrorKind::IllegalVisualRef: return "IllegalVisualRef";
    }
    return {};
}

namespace {

std::optional<Role> header_of_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.back() != ':') return std::nullopt;
    return role_from_header(line.substr(0, line.size() - 1));
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::string join_content(const std::vector<std::string_view>& lines) {
    size_t lo = 0, hi = lines.size();
    while (lo < hi && is_blank(lines[lo])) ++lo;
    while (hi > lo && is_blank(lines[hi - 1])) --hi;
    std::string out;
    for (size_t i = lo; i < hi; ++i) {
        if (i > lo) out += '\n';
        out += lines[i];
    }
    return out;
}

std::string trimmed(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

void check_sequence(std::span<const Role> got, std::span<const Role> want,
                    std::vector<TrajectoryError>& errors) {
    if (got.size() == want.size() && std::equal(got.begin(), got.end(), want.begin())) return;
    std::map<Role, int> need, have;
    for (Role r : want) need[r]++;
    for (Role r : got) have[r]++;
    bool counts_differ = false;
    for (auto [r, n] : need) {
        if (have[r] < n) {
            counts_differ = true;
            errors.push_back({TrajectoryErrorKind::MissingSection,
                              std::string(role_header(r)) + " section missing"});
        }
    }
    for (auto [r, n] : have) {
        if (n > need[r]) {
            counts_differ = true;
            // A role the path never uses is a sequence violation; repeating
            // an allowed role is a duplicate header.
            if (need[r] == 0)
                errors.push_back({TrajectoryErrorKind::OrderViolation,
                                  std::string(role_header(r)) + " does not belong to this path"});
            else
                errors.push_back({TrajectoryErrorKind::DuplicateHeader,
                                  std::string(role_header(r)) +
                                      " appears more often than the path allows"});
        }
    }
    if (!counts_differ)
        errors.push_back({TrajectoryErrorKind::OrderViolation,
                          "sections present but not in the path's role order"});
}

}  // namespace

ParseResult parse_trajectory(std::string_view text, Path path) {
    ParseResult result;
    std::vector<std::string_view> lines;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }

    std::vector<Role> roles;
    std::vector<std::vector<std::string_view>> contents;
    for (auto line : lines) {
        if (auto role = header_of_line(line)) {
            roles.push_back(*role);
            contents.emplace_back();
        } else if (!contents.empty()) {
            contents.back().push_back(line);
        }
        // content before the first header is ignored
    }

    for (size_t i = 0; i < roles.size(); ++i)
        result.segments.push_back({roles[i], join_content(contents[i]), {}});

    check_sequence(roles, role_sequence(path), result.errors);
    return result;
}

std::string render_trajectory(std::span<const Segment> segments) {
    std::vector<Role> roles;
    roles.reserve(segments.size());
    for (const auto& s : segments) roles.push_back(s.role);
    if (!infer_path_from_roles(roles))
        throw InvalidInput("render_trajectory: role order matches no path");
    std::string out;
    for (size_t i = 0; i < segments.size(); ++i) {
        if (i > 0) out += '\n';
        out += role_header(segments[i].role);
        out += ":\n";
        out += segments[i].text;
        out += '\n';
    }
    return out;
}

std::vector<TrajectoryError> validate_trajectory(const Trajectory& t) {
    std::vector<TrajectoryError> errors;
    std::vector<Role> roles;
    for (const auto& s : t.segments) roles.push_back(s.role);
    check_sequence(roles, role_sequence(t.path), errors);
    for (const auto& s : t.segments) {
        if (s.role == Role::Answer && trimmed(s.text).empty())
            errors.push_back({TrajectoryErrorKind::EmptyAnswer, "Answer text is empty"});
        if (!s.visual_refs.empty() && !is_visual_role(s.role))
            errors.push_back({TrajectoryErrorKind::IllegalVisualRef,
                              std::string(role_header(s.role)) + " segment carries visual refs"});
    }
    return errors;
}

std::string trajectory_to_json_line(const Trajectory& t) {
    json segs = json::array();
    for (const auto& s : t.segments) {
        json seg{{"role", std::string(1, role_code(s.role))}, {"text", s.text}};
        if (!s.visual_refs.empty()) seg["visual_refs"] = s.visual_refs;
        segs.push_back(std::move(seg));
    }
    json j{{"id", t.id}, {"query", t.query}, {"path", path_name(t.path)}, {"segments", segs}};
    return j.dump();
}

Trajectory trajectory_from_json_line(std::string_view line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InvalidInput("trajectory line is not valid JSON");
    Trajectory t;
    try {
        t.id = j.at("id").get<std::string>();
        t.query = j.value("query", std::string());
        auto p = parse_path(j.at("path").get<std::string>());
        if (!p) throw InvalidInput("unknown path: " + j.at("path").get<std::string>());
        t.path = *p;
        for (const auto& seg : j.at("segments")) {
            Segment s;
            auto role = parse_role(seg.at("role").get<std::string>());
            if (!role) throw InvalidInput("unknown role: " + seg.at("role").get<std::string>());
            s.role = *role;
            s.text = seg.at("text").get<std::string>();
            if (seg.contains("visual_refs"))
                s.visual_refs = seg.at("visual_refs").get<std::vector<std::string>>();
            t.segments.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("trajectory schema violation: ") + e.what());
    }
    return t;
}

std::vector<Trajectory> read_trajectory_corpus(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    std::vector<Trajectory> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        try {
            out.push_back(trajectory_from_json_line(line));
        } catch (const InvalidInput& e) {
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_trajectory_corpus(const std::string& file, std::span<const Trajectory> corpus) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    for (const auto& t : corpus) out << trajectory_to_json_line(t) << '\n';
    if (!out) throw IoError("write failed: " + file);
}

Trajectory read_trajectory_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    // Infer the path from the headers actually present.
    std::vector<Role> roles;
    size_t pos = 0;
    std::string_view sv = text;
    while (pos <= sv.size()) {
        size_t nl = sv.find('\n', pos);
        std::string_view line = sv.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        if (auto role = header_of_line(line)) roles.push_back(*role);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    auto path = infer_path_from_roles(roles);
    if (!path) throw InvalidInput(file + ": header sequence matches no path");

    auto parsed = parse_trajectory(text, *path);
    Trajectory t;
    t.id = std::filesystem::path(file).stem().string();
    t.path = *path;
    t.segments = std::move(parsed.segments);
    return t;
}

}  // namespace pathroute
