#pragma once

#include <map>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "pathroute/calibration.hpp"
#include "pathroute/records.hpp"

namespace pathroute {

// Routing policies of the ablation suite. All of them are deterministic
// given the record, including Random, which hashes (seed, record id).
struct FixedPolicy {
    Path path = Path::A;
};
struct RandomPolicy {
    uint64_t seed = 0;
};
struct ModelOnlyPolicy {
    std::shared_ptr<const PlannerModel> model;
};
struct BucketOnlyPolicy {
    std::vector<BucketRule> rules;
    std::map<std::string, Path> bucket_paths;  // missing buckets fall back to p_A
};
struct CalibratedPolicy {
    std::shared_ptr<const PlannerModel> model;
    CalibrationPolicy policy;
};
// Cheapest successful path in canonical order; p_A when nothing succeeds
// (such records score as incorrect under every policy).
struct OraclePolicy {};
// Uses the record's externally recorded path choice.
struct ExternalPolicy {};

using RoutingPolicy = std::variant<FixedPolicy, RandomPolicy, ModelOnlyPolicy, BucketOnlyPolicy,
                                   CalibratedPolicy, OraclePolicy, ExternalPolicy>;

Path route_record(const RoutingPolicy& policy, const PathOutcomeRecord& record);

struct EvaluationReport {
    size_t n = 0;
    double accuracy = 0.0;
    std::array<size_t, kNumPaths> selected{};
    // Conditional accuracy over the records routed to each path; undefined
    // (and excluded from exports) when that path was never selected.
    std::array<double, kNumPaths> conditional_accuracy{};
    std::array<bool, kNumPaths> conditional_defined{};
    double avg_tokens = 0.0;
    // Same stats per dataset tag, sorted by tag.
    std::vector<std::pair<std::string, EvaluationReport>> per_dataset;
};

EvaluationReport evaluate(const RoutingPolicy& policy, std::span<const PathOutcomeRecord> records);

// Fraction of records solvable by at least one path.
double oracle_accuracy(std::span<const PathOutcomeRecord> records);

// Mean output-token count of the paths the policy selects.
double token_cost(const RoutingPolicy& policy, std::span<const PathOutcomeRecord> records);

}  // namespace pathroute
