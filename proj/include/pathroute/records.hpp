#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathroute/path_space.hpp"
#include "pathroute/planner.hpp"

namespace pathroute {

// One query's recorded behavior under all five paths: binary outcomes,
// output-token counts, and optionally the query text, a precomputed bucket,
// planner features, raw outputs, and an externally chosen path. This is the
// interchange schema between execution harnesses, planner training, and the
// routing evaluation.
struct PathOutcomeRecord {
    std::string id;
    std::string dataset;
    std::string query;   // empty = absent
    std::string bucket;  // empty = absent (recomputable from query)
    std::optional<Eigen::VectorXd> features;
    std::array<int, kNumPaths> outcomes{};
    std::array<int64_t, kNumPaths> tokens{};
    std::optional<std::array<std::string, kNumPaths>> outputs;
    std::optional<Path> external_choice;
};

// JSON-lines form:
// {"id","dataset","query"?,"bucket"?,"features"?,
//  "outcomes":[5x0/1],"tokens":[5xint],"outputs"?,"external_choice"?}
std::string record_to_json_line(const PathOutcomeRecord& r);
PathOutcomeRecord record_from_json_line(std::string_view line);
std::vector<PathOutcomeRecord> read_records(const std::string& file);
void write_records(const std::string& file, std::span<const PathOutcomeRecord> records);

// Planner training view of a record. Requires features.
LabeledSample to_labeled_sample(const PathOutcomeRecord& r);
std::vector<LabeledSample> to_labeled_samples(std::span<const PathOutcomeRecord> records);

}  // namespace pathroute
