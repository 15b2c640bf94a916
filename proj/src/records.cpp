#include "pathroute/records.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "pathroute/errors.hpp"

namespace pathroute {

using nlohmann::json;

std::string record_to_json_line(const PathOutcomeRecord& r) {
    json j;
    j["id"] = r.id;
    j["dataset"] = r.dataset;
    if (!r.query.empty()) j["query"] = r.query;
    if (!r.bucket.empty()) j["bucket"] = r.bucket;
    if (r.features)
        j["features"] = std::vector<double>(r.features->data(),
                                            r.features->data() + r.features->size());
    j["outcomes"] = r.outcomes;
    j["tokens"] = r.tokens;
    if (r.outputs) j["outputs"] = *r.outputs;
    if (r.external_choice) j["external_choice"] = path_name(*r.external_choice);
    return j.dump();
}

PathOutcomeRecord record_from_json_line(std::string_view line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InvalidInput("record line is not valid JSON");
    PathOutcomeRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.dataset = j.value("dataset", std::string());
        r.query = j.value("query", std::string());
        r.bucket = j.value("bucket", std::string());
        if (j.contains("features")) {
            auto v = j.at("features").get<std::vector<double>>();
            r.features = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        auto outcomes = j.at("outcomes").get<std::vector<int>>();
        auto tokens = j.at("tokens").get<std::vector<int64_t>>();
        if (outcomes.size() != kNumPaths || tokens.size() != kNumPaths)
            throw InvalidInput("record must carry exactly 5 outcomes and 5 token counts");
        for (int p = 0; p < kNumPaths; ++p) {
            if (outcomes[static_cast<size_t>(p)] != 0 && outcomes[static_cast<size_t>(p)] != 1)
                throw InvalidInput("outcomes must be 0 or 1");
            if (tokens[static_cast<size_t>(p)] < 0)
                throw InvalidInput("token counts must be nonnegative");
            r.outcomes[static_cast<size_t>(p)] = outcomes[static_cast<size_t>(p)];
            r.tokens[static_cast<size_t>(p)] = tokens[static_cast<size_t>(p)];
        }
        if (j.contains("outputs")) {
            auto outs = j.at("outputs").get<std::vector<std::string>>();
            if (outs.size() != kNumPaths) throw InvalidInput("outputs must have 5 entries");
            std::array<std::string, kNumPaths> arr;
            std::move(outs.begin(), outs.end(), arr.begin());
            r.outputs = std::move(arr);
        }
        if (j.contains("external_choice")) {
            auto p = parse_path(j.at("external_choice").get<std::string>());
            if (!p) throw InvalidInput("unknown external_choice path");
            r.external_choice = *p;
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("record schema violation: ") + e.what());
    }
    return r;
}

std::vector<PathOutcomeRecord> read_records(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    std::vector<PathOutcomeRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json_line(line));
        } catch (const InvalidInput& e) {
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_records(const std::string& file, std::span<const PathOutcomeRecord> records) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    for (const auto& r : records) out << record_to_json_line(r) << '\n';
    if (!out) throw IoError("write failed: " + file);
}

LabeledSample to_labeled_sample(const PathOutcomeRecord& r) {
    if (!r.features)
        throw InvalidInput("MissingField: record " + r.id + " has no features");
    LabeledSample s;
    s.id = r.id;
    s.features = *r.features;
    s.outcomes = r.outcomes;
    return s;
}

std::vector<LabeledSample> to_labeled_samples(std::span<const PathOutcomeRecord> records) {
    std::vector<LabeledSample> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(to_labeled_sample(r));
    return out;
}

}  // namespace pathroute
