#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pathroute/path_space.hpp"
#include "pathroute/planner.hpp"
#include "pathroute/records.hpp"

namespace pathroute {

// Surface-pattern rule assigning queries to a query-form bucket. Matchers
// are case-insensitive; a matcher containing '*' is an anchored wildcard
// over the whole query, anything else matches as a substring. A rule fires
// when any matcher does.
struct BucketRule {
    std::string bucket_id;
    int priority = 0;  // larger wins
    std::vector<std::string> matchers;
};

// Per-bucket selection knobs: calibrated score is sigmoid(logit/tau + bias),
// and a non-default path is taken only when its calibrated score beats the
// default path's by more than the margin. Scores live in (0,1), so any
// margin >= 1 pins the bucket to its default path.
struct BucketPolicy {
    std::string bucket_id;
    double temperature = 1.0;
    std::array<double, kNumPaths> bias{0, 0, 0, 0, 0};
    double margin = 0.0;
    Path default_path = Path::A;
};

struct CalibrationPolicy {
    std::vector<BucketRule> rules;
    std::map<std::string, BucketPolicy> policies;  // keyed by bucket_id
};

inline constexpr std::string_view kDefaultBucket = "default";

// Highest-priority matching rule's bucket; "default" when nothing matches.
std::string classify_bucket(std::string_view query, std::span<const BucketRule> rules);

PathVector calibrate(const PathVector& logits, const BucketPolicy& policy);

Path select_path(const PathVector& calibrated, const BucketPolicy& policy);

// Search grid for fit_policy. Bias values are searched one path coordinate
// at a time (holding the others fixed) to keep the sweep small; the trivial
// candidates (tau=1, bias=0, margin=1) are always included, so a fitted
// bucket can never score below the best fixed default path.
struct CalibrationGrid {
    std::vector<double> temperatures{0.5, 1.0, 2.0, 4.0};
    std::vector<double> bias_values{-0.5, 0.0, 0.5};
    std::vector<double> margins{0.0, 0.02, 0.05, 0.1};
};

// Grid-fits one BucketPolicy per bucket against routed accuracy on that
// bucket's records (ties: lower mean selected-path token count, then earlier
// grid candidate). Buckets without calibration records inherit the fitted
// "default" bucket policy; an empty "default" bucket is fitted on the whole
// pool. Records need features plus a query or precomputed bucket.
CalibrationPolicy fit_policy(std::span<const PathOutcomeRecord> records, const PlannerModel& model,
                             std::span<const BucketRule> rules, const CalibrationGrid& grid);

// Bucket assignment used by routing and fitting: classify the query when one
// is present, otherwise fall back to the precomputed bucket.
std::string bucket_for_record(const PathOutcomeRecord& r, std::span<const BucketRule> rules);

// Policy file (version 1):
// {"version":1, "rules":[{"bucket","priority","matchers"}],
//  "policies":{bucket:{"temperature","bias":[5],"margin","default_path"}},
//  "bucket_paths"?:{bucket:path}}
void write_policy_file(const std::string& file, const CalibrationPolicy& policy);
CalibrationPolicy read_policy_file(const std::string& file);
// Reads just the rule list (a policy file or a bare rules file).
std::vector<BucketRule> read_rules_file(const std::string& file);
// Optional per-bucket fixed paths for bucket-only routing.
std::map<std::string, Path> read_bucket_paths(const std::string& file);

}  // namespace pathroute
