#include <doctest.h>

#include <fstream>
#include <sstream>

#include "pathroute/path_space.hpp"
#include "pathroute/prompts.hpp"

using namespace pathroute;

namespace {
std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}
}  // namespace

TEST_CASE("role sequences") {
    auto seq = [](Path p) {
        std::string s;
        for (Role r : role_sequence(p)) s += role_code(r);
        return s;
    };
    CHECK(seq(Path::A) == "A");
    CHECK(seq(Path::U) == "UA");
    CHECK(seq(Path::R) == "URA");
    CHECK(seq(Path::C) == "URCRA");
    CHECK(seq(Path::H) == "URHRA");
    for (Path p : all_paths()) CHECK(role_sequence(p).back() == Role::Answer);
}

TEST_CASE("canonical order and names") {
    CHECK(path_index(Path::A) == 0);
    CHECK(path_index(Path::H) == 4);
    for (Path p : all_paths()) CHECK(parse_path(path_name(p)) == p);
    CHECK(!parse_path("p_X"));
    CHECK(parse_role("Visual") == Role::Construction);
    CHECK(parse_role("C") == Role::Construction);
    CHECK(role_header(Role::Construction) == "Visual");
    CHECK(is_visual_role(Role::Construction));
    CHECK(is_visual_role(Role::Hypothesis));
    CHECK(!is_visual_role(Role::Reasoning));
}

TEST_CASE("path inference from role sequences") {
    for (Path p : all_paths()) {
        auto seq = role_sequence(p);
        CHECK(infer_path_from_roles({seq.begin(), seq.end()}) == p);
    }
    std::vector<Role> bogus{Role::Reasoning, Role::Answer};
    CHECK(!infer_path_from_roles(bogus));
}

TEST_CASE("p_A prompt is the query itself") {
    CHECK(render_prompt(Path::A, "What color is the car?") == "What color is the car?");
}

TEST_CASE("wrapped prompts carry the path-locked instruction") {
    for (Path p : {Path::U, Path::R, Path::C, Path::H}) {
        const std::string out = render_prompt(p, "q");
        CHECK(out.find("Now solve the following query using ONLY this path") != std::string::npos);
        CHECK(out.find("<benchmark query>") == std::string::npos);
        // query is the final line
        CHECK(out.substr(out.size() - 2) == "\nq");
    }
    CHECK(render_prompt(Path::R, "q").find("Understanding -> Reasoning -> Answer") !=
          std::string::npos);
    CHECK(render_prompt(Path::C, "q").find(
              "Understanding -> Reasoning -> Visual -> Reasoning -> Answer") != std::string::npos);
    CHECK(render_prompt(Path::H, "q").find("Hypothesis:") != std::string::npos);
    CHECK(render_prompt(Path::H, "q").find("Hypothesis = Visual Hypothesis") != std::string::npos);
}

TEST_CASE("prompts byte-match the stored template fixtures") {
    const std::string dir = std::string(PATHROUTE_FIXTURES) + "/prompts/";
    const std::string query = "Which graph shows the relation?";
    for (Path p : {Path::U, Path::R, Path::C, Path::H}) {
        std::string tpl = read_file(dir + std::string(path_name(p)) + ".txt");
        const std::string placeholder = "<benchmark query>";
        const size_t at = tpl.find(placeholder);
        REQUIRE(at != std::string::npos);
        tpl.replace(at, placeholder.size(), query);
        CHECK(render_prompt(p, query) == tpl);
    }
}
