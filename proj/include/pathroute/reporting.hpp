#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathroute/audit.hpp"
#include "pathroute/routing.hpp"

namespace pathroute {

// Exports are plotting-ready: stable column order, reals printed as
// 6-decimal fixed, undefined conditional accuracies marked "NA" in CSV and
// null in JSON.

std::string fmt6(double v);

// One evaluated policy, labeled for grid rows.
struct LabeledReport {
    std::string label;
    EvaluationReport report;
};

// scope column: "overall" or the dataset tag.
std::string report_to_csv(const EvaluationReport& rep);
nlohmann::json report_to_json(const EvaluationReport& rep);
EvaluationReport report_from_json(const nlohmann::json& j);

// Accuracy grid: one row per policy, one column per dataset tag plus overall.
std::string ablation_grid_csv(std::span<const LabeledReport> reports);
// Selection counts and shares per (policy, dataset) scope.
std::string distribution_csv(std::span<const LabeledReport> reports);
// Conditional accuracy per (policy, dataset) scope; NA when never selected.
std::string conditional_csv(std::span<const LabeledReport> reports);
// Token-accuracy scatter: exactly policy,dataset,avg_tokens,accuracy.
std::string scatter_csv(std::span<const LabeledReport> reports);
nlohmann::json eval_bundle_json(std::span<const LabeledReport> reports);

// Compliance table with count/total/rate triples per check, plus accuracy
// and average tokens.
std::string compliance_csv(std::span<const PathComplianceRow> table);
nlohmann::json compliance_json(std::span<const PathComplianceRow> table);

void write_text_file(const std::string& file, std::string_view content);

}  // namespace pathroute
