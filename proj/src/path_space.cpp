#include "pathroute/path_space.hpp"

namespace pathroute {

namespace {
constexpr Role kSeqA[] = {Role::Answer};
constexpr Role kSeqU[] = {Role::Understanding, Role::Answer};
constexpr Role kSeqR[] = {Role::Understanding, Role::Reasoning, Role::Answer};
constexpr Role kSeqC[] = {Role::Understanding, Role::Reasoning, Role::Construction,
                          Role::Reasoning, Role::Answer};
constexpr Role kSeqH[] = {Role::Understanding, Role::Reasoning, Role::Hypothesis,
                          Role::Reasoning, Role::Answer};
}  // namespace

std::span<const Role> role_sequence(Path p) {
    switch (p) {
        case Path::A: return kSeqA;
        case Path::U: return kSeqU;
        case Path::R: return kSeqR;
        case Path::C: return kSeqC;
        case Path::H: return kSeqH;
    }
    return {};
}

bool is_visual_role(Role r) { return r == Role::Construction || r == Role::Hypothesis; }

std::string_view role_name(Role r) {
    switch (r) {
        case Role::Understanding: return "Understanding";
        case Role::Reasoning: return "Reasoning";
        case Role::Construction: return "Construction";
        case Role::Hypothesis: return "Hypothesis";
        case Role::Answer: return "Answer";
    }
    return {};
}

std::string_view role_header(Role r) {
    // Construction is tagged "Visual" in trajectory text and prompts.
    if (r == Role::Construction) return "Visual";
    return role_name(r);
}

char role_code(Role r) {
    switch (r) {
        case Role::Understanding: return 'U';
        case Role::Reasoning: return 'R';
        case Role::Construction: return 'C';
        case Role::Hypothesis: return 'H';
        case Role::Answer: return 'A';
    }
    return '?';
}

std::string_view path_name(Path p) {
    switch (p) {
        case Path::A: return "p_A";
        case Path::U: return "p_U";
        case Path::R: return "p_R";
        case Path::C: return "p_C";
        case Path::H: return "p_H";
    }
    return {};
}

std::optional<Path> parse_path(std::string_view name) {
    for (Path p : all_paths())
        if (name == path_name(p)) return p;
    // Also accept the bare letter.
    if (name.size() == 1) {
        switch (name[0]) {
            case 'A': return Path::A;
            case 'U': return Path::U;
            case 'R': return Path::R;
            case 'C': return Path::C;
            case 'H': return Path::H;
        }
    }
    return std::nullopt;
}

std::optional<Role> parse_role(std::string_view name) {
    if (name.size() == 1) {
        switch (name[0]) {
            case 'U': return Role::Understanding;
            case 'R': return Role::Reasoning;
            case 'C': return Role::Construction;
            case 'H': return Role::Hypothesis;
            case 'A': return Role::Answer;
        }
        return std::nullopt;
    }
    for (Role r : {Role::Understanding, Role::Reasoning, Role::Construction,
                   Role::Hypothesis, Role::Answer})
        if (name == role_name(r)) return r;
    return role_from_header(name);
}

std::optional<Role> role_from_header(std::string_view header) {
    if (header == "Understanding") return Role::Understanding;
    if (header == "Reasoning") return Role::Reasoning;
    if (header == "Visual") return Role::Construction;
    if (header == "Hypothesis") return Role::Hypothesis;
    if (header == "Answer") return Role::Answer;
    return std::nullopt;
}

std::optional<Path> infer_path_from_roles(std::span<const Role> roles) {
    for (Path p : all_paths()) {
        auto seq = role_sequence(p);
        if (seq.size() != roles.size()) continue;
        bool same = true;
        for (size_t i = 0; i < seq.size(); ++i)
            if (seq[i] != roles[i]) { same = false; break; }
        if (same) return p;
    }
    return std::nullopt;
}

}  // namespace pathroute
