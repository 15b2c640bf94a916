#include <doctest.h>

#include <filesystem>

#include "pathroute/errors.hpp"
#include "pathroute/rng.hpp"
#include "pathroute/trajectory.hpp"

using namespace pathroute;

namespace {

bool has_error(const std::vector<TrajectoryError>& errors, TrajectoryErrorKind kind) {
    for (const auto& e : errors)
        if (e.kind == kind) return true;
    return false;
}

const char* kGoodR =
    "Understanding:\nA velocity-time graph is shown.\n\n"
    "Reasoning:\nThe curve crosses zero at t=1 and the area balances later.\n\n"
    "Answer:\nB\n";

}  // namespace

TEST_CASE("parse splits a well-formed trace") {
    auto res = parse_trajectory(kGoodR, Path::R);
    REQUIRE(res.ok());
    REQUIRE(res.segments.size() == 3);
    CHECK(res.segments[0].role == Role::Understanding);
    CHECK(res.segments[1].role == Role::Reasoning);
    CHECK(res.segments[2].role == Role::Answer);
    CHECK(res.segments[2].text == "B");
}

TEST_CASE("parse reports structural violations without aborting") {
    auto missing = parse_trajectory("Understanding:\nu\n\nAnswer:\na\n", Path::R);
    CHECK(has_error(missing.errors, TrajectoryErrorKind::MissingSection));

    auto dup = parse_trajectory(
        "Understanding:\nu\n\nReasoning:\nr\n\nReasoning:\nr2\n\nAnswer:\na\n", Path::R);
    CHECK(has_error(dup.errors, TrajectoryErrorKind::DuplicateHeader));

    auto swapped = parse_trajectory("Reasoning:\nr\n\nUnderstanding:\nu\n\nAnswer:\na\n", Path::R);
    CHECK(has_error(swapped.errors, TrajectoryErrorKind::OrderViolation));
    CHECK(!has_error(swapped.errors, TrajectoryErrorKind::MissingSection));
}

TEST_CASE("parse details") {
    // headers must sit at column 0 and be case-sensitive
    auto indented = parse_trajectory("Understanding:\n Answer:\nu\n\nAnswer:\na\n", Path::U);
    REQUIRE(indented.ok());
    CHECK(indented.segments[0].text == " Answer:\nu");

    auto lowercase = parse_trajectory("understanding:\nu\n\nAnswer:\na\n", Path::A);
    CHECK(lowercase.ok());  // only "Answer:" counts as a header

    // blank-line runs between blocks collapse
    auto res = parse_trajectory("Understanding:\n\n\nu\n\n\n\nAnswer:\na\n\n\n", Path::U);
    REQUIRE(res.ok());
    CHECK(res.segments[0].text == "u");
    CHECK(res.segments[1].text == "a");

    // prose before the first header is ignored
    auto preamble = parse_trajectory("Sure, here is the trace.\nAnswer:\nB\n", Path::A);
    CHECK(preamble.ok());
    CHECK(preamble.segments[0].text == "B");
}

TEST_CASE("render emits canonical blocks") {
    CHECK(render_trajectory(std::vector<Segment>{{Role::Answer, "B", {}}}) == "Answer:\nB\n");
    std::vector<Segment> u{{Role::Understanding, "a bike", {}}, {Role::Answer, "kawasaki", {}}};
    CHECK(render_trajectory(u) == "Understanding:\na bike\n\nAnswer:\nkawasaki\n");
    std::vector<Segment> bad{{Role::Reasoning, "r", {}}};
    CHECK_THROWS_AS(render_trajectory(bad), InvalidInput);
}

TEST_CASE("render then parse is the identity on generated trajectories") {
    Rng rng(20240811);
    const std::string words[] = {"edge", "angle", "series", "panel", "row",
                                 "curve", "bridge", "latent", "shape"};
    for (int it = 0; it < 200; ++it) {
        const Path path = static_cast<Path>(rng.below(5));
        std::vector<Segment> segments;
        for (Role role : role_sequence(path)) {
            std::string text;
            const int lines = 1 + static_cast<int>(rng.below(3));
            for (int l = 0; l < lines; ++l) {
                if (l) text += '\n';
                const int n = 1 + static_cast<int>(rng.below(6));
                for (int w = 0; w < n; ++w) {
                    if (w) text += ' ';
                    text += words[rng.below(std::size(words))];
                }
            }
            segments.push_back({role, text, {}});
        }
        auto parsed = parse_trajectory(render_trajectory(segments), path);
        REQUIRE(parsed.ok());
        CHECK(parsed.segments == segments);
    }
}

TEST_CASE("validate collects all violations") {
    Trajectory ok;
    ok.id = "t1";
    ok.path = Path::C;
    ok.segments = {{Role::Understanding, "u", {}},
                   {Role::Reasoning, "r1", {}},
                   {Role::Construction, "isolate the row", {"vs_001"}},
                   {Role::Reasoning, "r2", {}},
                   {Role::Answer, "D", {}}};
    CHECK(validate_trajectory(ok).empty());

    Trajectory stray;
    stray.path = Path::A;
    stray.segments = {{Role::Understanding, "u", {}}, {Role::Answer, "a", {}}};
    CHECK(has_error(validate_trajectory(stray), TrajectoryErrorKind::OrderViolation));

    Trajectory misordered;
    misordered.path = Path::U;
    misordered.segments = {{Role::Answer, "a", {}}, {Role::Understanding, "u", {}}};
    CHECK(has_error(validate_trajectory(misordered), TrajectoryErrorKind::OrderViolation));

    Trajectory bad_ref;
    bad_ref.path = Path::R;
    bad_ref.segments = {{Role::Understanding, "u", {}},
                        {Role::Reasoning, "r", {"vs_1"}},
                        {Role::Answer, "a", {}}};
    CHECK(has_error(validate_trajectory(bad_ref), TrajectoryErrorKind::IllegalVisualRef));

    Trajectory empty_answer;
    empty_answer.path = Path::U;
    empty_answer.segments = {{Role::Understanding, "u", {}}, {Role::Answer, "  \n ", {}}};
    CHECK(has_error(validate_trajectory(empty_answer), TrajectoryErrorKind::EmptyAnswer));
}

TEST_CASE("fixture corpus round-trips") {
    const std::string file = std::string(PATHROUTE_FIXTURES) + "/trajectories/corpus.jsonl";
    auto corpus = read_trajectory_corpus(file);
    REQUIRE(corpus.size() >= 10);
    bool saw[5] = {};
    for (const auto& t : corpus) {
        CHECK(validate_trajectory(t).empty());
        saw[path_index(t.path)] = true;
        // text round-trip preserves roles and text (refs live in the JSON form)
        auto parsed = parse_trajectory(render_trajectory(t.segments), t.path);
        REQUIRE(parsed.ok());
        REQUIRE(parsed.segments.size() == t.segments.size());
        for (size_t i = 0; i < t.segments.size(); ++i) {
            CHECK(parsed.segments[i].role == t.segments[i].role);
            CHECK(parsed.segments[i].text == t.segments[i].text);
        }
        // JSON line round-trip preserves everything
        CHECK(trajectory_from_json_line(trajectory_to_json_line(t)) == t);
    }
    for (bool s : saw) CHECK(s);

    const std::string tmp = (std::filesystem::temp_directory_path() / "corpus_rt.jsonl").string();
    write_trajectory_corpus(tmp, corpus);
    auto back = read_trajectory_corpus(tmp);
    CHECK(back == corpus);
}

TEST_CASE("single-file text trajectory infers its path") {
    const std::string file = std::string(PATHROUTE_FIXTURES) + "/trajectories/flight_pC.txt";
    auto t = read_trajectory_file(file);
    CHECK(t.path == Path::C);
    CHECK(t.id == "flight_pC");
    REQUIRE(t.segments.size() == 5);
    CHECK(t.segments[4].text == "sesuai jadwal");
}

TEST_CASE("corpus reader rejects malformed lines") {
    namespace fs = std::filesystem;
    const std::string tmp = (fs::temp_directory_path() / "bad_corpus.jsonl").string();
    {
        std::ofstream out(tmp);
        out << "{\"id\":\"x\",\"path\":\"p_Z\",\"segments\":[]}\n";
    }
    CHECK_THROWS_AS(read_trajectory_corpus(tmp), InvalidInput);
    CHECK_THROWS_AS(read_trajectory_corpus("/nonexistent/nope.jsonl"), IoError);
}
