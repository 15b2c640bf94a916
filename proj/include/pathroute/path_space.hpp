#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace pathroute {

// The five functional roles a trajectory segment can play. Construction and
// Hypothesis are the visual-thought roles; their text spans can carry
// references to visual summaries.
enum class Role { Understanding, Reasoning, Construction, Hypothesis, Answer };

// The five coordination paths in canonical order. Canonical order is
// ascending nominal cost and is the tie-break order everywhere.
enum class Path { A = 0, U = 1, R = 2, C = 3, H = 4 };

inline constexpr int kNumPaths = 5;

constexpr std::array<Path, kNumPaths> all_paths() {
    return {Path::A, Path::U, Path::R, Path::C, Path::H};
}

constexpr int path_index(Path p) { return static_cast<int>(p); }

// Role sequence executed by each path:
//   p_A = (A), p_U = (U,A), p_R = (U,R,A), p_C = (U,R,C,R,A), p_H = (U,R,H,R,A)
std::span<const Role> role_sequence(Path p);

bool is_visual_role(Role r);

std::string_view role_name(Role r);    // "Understanding", "Reasoning", "Construction", ...
std::string_view role_header(Role r);  // header spelling in tagged text; C renders as "Visual"
char role_code(Role r);                // 'U' 'R' 'C' 'H' 'A'
std::string_view path_name(Path p);    // "p_A" ... "p_H"

std::optional<Path> parse_path(std::string_view name);
// Accepts single-letter codes, role names, and header spellings ("Visual" -> C).
std::optional<Role> parse_role(std::string_view name);
// Maps a header spelling ("Understanding", "Visual", ...) to its role.
std::optional<Role> role_from_header(std::string_view header);

// Recovers the unique path whose role sequence equals `roles`, if any.
std::optional<Path> infer_path_from_roles(std::span<const Role> roles);

}  // namespace pathroute
