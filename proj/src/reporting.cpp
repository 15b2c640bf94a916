#include "pathroute/reporting.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "pathroute/errors.hpp"

namespace pathroute {

using nlohmann::json;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

namespace {

void report_scope_row(std::string& out, const std::string& scope, const EvaluationReport& r) {
    out += scope;
    out += ',' + std::to_string(r.n);
    out += ',' + fmt6(r.accuracy);
    out += ',' + fmt6(r.avg_tokens);
    for (int p = 0; p < kNumPaths; ++p) out += ',' + std::to_string(r.selected[static_cast<size_t>(p)]);
    for (int p = 0; p < kNumPaths; ++p) {
        out += ',';
        out += r.conditional_defined[static_cast<size_t>(p)]
                   ? fmt6(r.conditional_accuracy[static_cast<size_t>(p)])
                   : "NA";
    }
    out += '\n';
}

std::string report_header() {
    std::string h = "scope,n,accuracy,avg_tokens";
    for (Path p : all_paths()) h += ",count_" + std::string(path_name(p));
    for (Path p : all_paths()) h += ",acc_" + std::string(path_name(p));
    h += '\n';
    return h;
}

}  // namespace

std::string report_to_csv(const EvaluationReport& rep) {
    std::string out = report_header();
    report_scope_row(out, "overall", rep);
    for (const auto& [tag, sub] : rep.per_dataset) report_scope_row(out, tag, sub);
    return out;
}

namespace {

json scope_json(const EvaluationReport& r) {
    json j;
    j["n"] = r.n;
    j["accuracy"] = r.accuracy;
    j["avg_tokens"] = r.avg_tokens;
    json sel = json::object(), cond = json::object();
    for (Path p : all_paths()) {
        const size_t i = static_cast<size_t>(path_index(p));
        sel[std::string(path_name(p))] = r.selected[i];
        cond[std::string(path_name(p))] =
            r.conditional_defined[i] ? json(r.conditional_accuracy[i]) : json(nullptr);
    }
    j["selected"] = sel;
    j["conditional_accuracy"] = cond;
    return j;
}

EvaluationReport scope_from_json(const json& j) {
    EvaluationReport r;
    r.n = j.at("n").get<size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.avg_tokens = j.at("avg_tokens").get<double>();
    for (Path p : all_paths()) {
        const size_t i = static_cast<size_t>(path_index(p));
        r.selected[i] = j.at("selected").at(std::string(path_name(p))).get<size_t>();
        const auto& c = j.at("conditional_accuracy").at(std::string(path_name(p)));
        r.conditional_defined[i] = !c.is_null();
        r.conditional_accuracy[i] = c.is_null() ? 0.0 : c.get<double>();
    }
    return r;
}

}  // namespace

json report_to_json(const EvaluationReport& rep) {
    json j = scope_json(rep);
    json ds = json::array();
    for (const auto& [tag, sub] : rep.per_dataset)
        ds.push_back(json{{"dataset", tag}, {"report", scope_json(sub)}});
    j["per_dataset"] = ds;
    return j;
}

EvaluationReport report_from_json(const json& j) {
    try {
        EvaluationReport r = scope_from_json(j);
        for (const auto& entry : j.at("per_dataset"))
            r.per_dataset.emplace_back(entry.at("dataset").get<std::string>(),
                                       scope_from_json(entry.at("report")));
        return r;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("report schema violation: ") + e.what());
    }
}

namespace {

std::vector<std::string> dataset_columns(std::span<const LabeledReport> reports) {
    std::set<std::string> tags;
    for (const auto& lr : reports)
        for (const auto& [tag, _] : lr.report.per_dataset) tags.insert(tag);
    return {tags.begin(), tags.end()};
}

}  // namespace

std::string ablation_grid_csv(std::span<const LabeledReport> reports) {
    const auto tags = dataset_columns(reports);
    std::string out = "policy";
    for (const auto& t : tags) out += ',' + t;
    out += ",overall\n";
    for (const auto& lr : reports) {
        out += lr.label;
        for (const auto& t : tags) {
            out += ',';
            bool found = false;
            for (const auto& [tag, sub] : lr.report.per_dataset)
                if (tag == t) {
                    out += fmt6(sub.accuracy);
                    found = true;
                    break;
                }
            if (!found) out += "NA";
        }
        out += ',' + fmt6(lr.report.accuracy) + '\n';
    }
    return out;
}

namespace {

void per_scope_rows(std::string& out, const LabeledReport& lr,
                    const std::function<void(std::string&, const std::string&,
                                             const EvaluationReport&)>& emit) {
    emit(out, "overall", lr.report);
    for (const auto& [tag, sub] : lr.report.per_dataset) emit(out, tag, sub);
}

}  // namespace

std::string distribution_csv(std::span<const LabeledReport> reports) {
    std::string out = "policy,dataset,n";
    for (Path p : all_paths()) out += ",count_" + std::string(path_name(p));
    for (Path p : all_paths()) out += ",share_" + std::string(path_name(p));
    out += '\n';
    for (const auto& lr : reports) {
        per_scope_rows(out, lr, [&](std::string& o, const std::string& scope,
                                    const EvaluationReport& r) {
            o += lr.label + ',' + scope + ',' + std::to_string(r.n);
            for (int p = 0; p < kNumPaths; ++p)
                o += ',' + std::to_string(r.selected[static_cast<size_t>(p)]);
            for (int p = 0; p < kNumPaths; ++p)
                o += ',' + fmt6(r.n ? static_cast<double>(r.selected[static_cast<size_t>(p)]) /
                                          static_cast<double>(r.n)
                                    : 0.0);
            o += '\n';
        });
    }
    return out;
}

std::string conditional_csv(std::span<const LabeledReport> reports) {
    std::string out = "policy,dataset";
    for (Path p : all_paths()) out += ",acc_" + std::string(path_name(p));
    out += '\n';
    for (const auto& lr : reports) {
        per_scope_rows(out, lr, [&](std::string& o, const std::string& scope,
                                    const EvaluationReport& r) {
            o += lr.label + ',' + scope;
            for (int p = 0; p < kNumPaths; ++p) {
                o += ',';
                o += r.conditional_defined[static_cast<size_t>(p)]
                         ? fmt6(r.conditional_accuracy[static_cast<size_t>(p)])
                         : "NA";
            }
            o += '\n';
        });
    }
    return out;
}

std::string scatter_csv(std::span<const LabeledReport> reports) {
    std::string out = "policy,dataset,avg_tokens,accuracy\n";
    for (const auto& lr : reports) {
        per_scope_rows(out, lr, [&](std::string& o, const std::string& scope,
                                    const EvaluationReport& r) {
            o += lr.label + ',' + scope + ',' + fmt6(r.avg_tokens) + ',' + fmt6(r.accuracy) + '\n';
        });
    }
    return out;
}

json eval_bundle_json(std::span<const LabeledReport> reports) {
    json j = json::array();
    for (const auto& lr : reports)
        j.push_back(json{{"policy", lr.label}, {"report", report_to_json(lr.report)}});
    return j;
}

std::string compliance_csv(std::span<const PathComplianceRow> table) {
    std::string out =
        "path,n,section_ok,section_rate,pred_answer_ok,pred_answer_rate,"
        "strict_ok,strict_rate,accuracy,avg_tokens\n";
    for (const auto& row : table) {
        const double n = static_cast<double>(row.n);
        out += std::string(path_name(row.path));
        out += ',' + std::to_string(row.n);
        out += ',' + std::to_string(row.section_ok) + ',' + fmt6(row.section_ok / n);
        out += ',' + std::to_string(row.pred_ok) + ',' + fmt6(row.pred_ok / n);
        out += ',' + std::to_string(row.strict_ok) + ',' + fmt6(row.strict_ok / n);
        out += ',';
        out += row.accuracy ? fmt6(*row.accuracy) : "NA";
        out += ',' + fmt6(row.avg_tokens) + '\n';
    }
    return out;
}

json compliance_json(std::span<const PathComplianceRow> table) {
    json j = json::array();
    for (const auto& row : table) {
        const double n = static_cast<double>(row.n);
        json r{{"path", path_name(row.path)},
               {"n", row.n},
               {"section_ok", row.section_ok},
               {"section_rate", row.section_ok / n},
               {"pred_answer_ok", row.pred_ok},
               {"pred_answer_rate", row.pred_ok / n},
               {"strict_ok", row.strict_ok},
               {"strict_rate", row.strict_ok / n},
               {"accuracy", row.accuracy ? json(*row.accuracy) : json(nullptr)},
               {"avg_tokens", row.avg_tokens}};
        j.push_back(std::move(r));
    }
    return j;
}

void write_text_file(const std::string& file, std::string_view content) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    out << content;
    if (!out) throw IoError("write failed: " + file);
}

}  // namespace pathroute
