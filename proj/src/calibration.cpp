#include "pathroute/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "pathroute/errors.hpp"

namespace pathroute {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    return out;
}

// Anchored glob over the whole string; '*' matches any run.
bool glob_match(std::string_view pattern, std::string_view text) {
    size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

bool matcher_hits(const std::string& matcher, const std::string& query_lower) {
    std::string m = lower(matcher);
    if (m.find('*') != std::string::npos) return glob_match(m, query_lower);
    return query_lower.find(m) != std::string::npos;
}

}  // namespace

std::string classify_bucket(std::string_view query, std::span<const BucketRule> rules) {
    const std::string q = lower(query);
    const BucketRule* best = nullptr;
    for (const auto& rule : rules) {
        if (best && rule.priority <= best->priority) continue;
        for (const auto& m : rule.matchers) {
            if (matcher_hits(m, q)) {
                best = &rule;
                break;
            }
        }
    }
    return best ? best->bucket_id : std::string(kDefaultBucket);
}

PathVector calibrate(const PathVector& logits, const BucketPolicy& policy) {
    if (!(policy.temperature > 0.0))
        throw InvalidInput("calibrate: temperature must be positive");
    PathVector s;
    for (int p = 0; p < kNumPaths; ++p) {
        const double z = logits[p] / policy.temperature + policy.bias[static_cast<size_t>(p)];
        s[p] = 1.0 / (1.0 + std::exp(-z));
    }
    return s;
}

Path select_path(const PathVector& calibrated, const BucketPolicy& policy) {
    const int def = path_index(policy.default_path);
    int best = -1;
    for (int p = 0; p < kNumPaths; ++p) {
        if (p == def) continue;
        if (best < 0 || calibrated[p] > calibrated[best]) best = p;
    }
    if (best >= 0 && calibrated[best] - calibrated[def] > policy.margin)
        return static_cast<Path>(best);
    return policy.default_path;
}

std::string bucket_for_record(const PathOutcomeRecord& r, std::span<const BucketRule> rules) {
    if (!r.query.empty()) return classify_bucket(r.query, rules);
    if (!r.bucket.empty()) return r.bucket;
    throw InvalidInput("MissingField: record " + r.id + " has neither query nor bucket");
}

namespace {

struct FitPoint {
    PathVector logits;
    std::array<int, kNumPaths> outcomes;
    std::array<int64_t, kNumPaths> tokens;
};

struct FitScore {
    int64_t correct = -1;
    int64_t token_sum = 0;

    // higher accuracy first, then cheaper tokens
    bool better_than(const FitScore& o) const {
        if (correct != o.correct) return correct > o.correct;
        return token_sum < o.token_sum;
    }
};

FitScore score_policy(const std::vector<FitPoint>& pts, const BucketPolicy& pol) {
    FitScore s;
    s.correct = 0;
    for (const auto& pt : pts) {
        const Path routed = select_path(calibrate(pt.logits, pol), pol);
        const int idx = path_index(routed);
        s.correct += pt.outcomes[static_cast<size_t>(idx)];
        s.token_sum += pt.tokens[static_cast<size_t>(idx)];
    }
    return s;
}

BucketPolicy fit_bucket(const std::string& bucket_id, const std::vector<FitPoint>& pts,
                        const CalibrationGrid& grid) {
    BucketPolicy best;
    best.bucket_id = bucket_id;
    FitScore best_score;  // sentinel, loses to everything

    auto consider = [&](const BucketPolicy& cand) {
        FitScore s = score_policy(pts, cand);
        if (s.better_than(best_score)) {
            best_score = s;
            best = cand;
        }
    };

    for (Path def : all_paths()) {
        for (double tau : grid.temperatures) {
            for (double margin : grid.margins) {
                BucketPolicy cand;
                cand.bucket_id = bucket_id;
                cand.default_path = def;
                cand.temperature = tau;
                cand.margin = margin;
                // Coordinate-wise bias sweep, one path at a time; the
                // incumbent is scored first so each pass can only improve.
                for (int p = 0; p < kNumPaths; ++p) {
                    double coord_best = cand.bias[static_cast<size_t>(p)];
                    FitScore coord_score = score_policy(pts, cand);
                    for (double b : grid.bias_values) {
                        BucketPolicy probe = cand;
                        probe.bias[static_cast<size_t>(p)] = b;
                        FitScore s = score_policy(pts, probe);
                        if (s.better_than(coord_score)) {
                            coord_score = s;
                            coord_best = b;
                        }
                    }
                    cand.bias[static_cast<size_t>(p)] = coord_best;
                }
                consider(cand);
            }
        }
    }

    // Trivial fallbacks close the sweep: tau=1, zero bias, margin 1 pins the
    // default path, so the best fixed path is the floor of every fit.
    for (Path def : all_paths()) {
        BucketPolicy cand;
        cand.bucket_id = bucket_id;
        cand.default_path = def;
        cand.margin = 1.0;
        consider(cand);
    }
    return best;
}

}  // namespace

CalibrationPolicy fit_policy(std::span<const PathOutcomeRecord> records, const PlannerModel& model,
                             std::span<const BucketRule> rules, const CalibrationGrid& grid) {
    if (records.empty()) throw InvalidInput("fit_policy: no calibration records");
    if (grid.temperatures.empty() || grid.bias_values.empty() || grid.margins.empty())
        throw InvalidInput("fit_policy: grid must be nonempty");

    std::map<std::string, std::vector<FitPoint>> by_bucket;
    std::vector<FitPoint> all_points;
    all_points.reserve(records.size());
    for (const auto& r : records) {
        if (!r.features) throw InvalidInput("MissingField: record " + r.id + " has no features");
        FitPoint pt;
        pt.logits = forward(model, *r.features);
        pt.outcomes = r.outcomes;
        pt.tokens = r.tokens;
        by_bucket[bucket_for_record(r, rules)].push_back(pt);
        all_points.push_back(pt);
    }

    CalibrationPolicy policy;
    policy.rules.assign(rules.begin(), rules.end());

    // Fit the fallback bucket first; empty buckets inherit it.
    const std::string def_bucket(kDefaultBucket);
    const auto def_it = by_bucket.find(def_bucket);
    BucketPolicy def_policy = fit_bucket(
        def_bucket, def_it != by_bucket.end() ? def_it->second : all_points, grid);
    policy.policies[def_bucket] = def_policy;

    // Every bucket named by a rule gets a policy.
    for (const auto& rule : rules) {
        if (policy.policies.count(rule.bucket_id)) continue;
        auto it = by_bucket.find(rule.bucket_id);
        if (it == by_bucket.end() || it->second.empty()) {
            BucketPolicy inherited = def_policy;
            inherited.bucket_id = rule.bucket_id;
            policy.policies[rule.bucket_id] = inherited;
        } else {
            policy.policies[rule.bucket_id] = fit_bucket(rule.bucket_id, it->second, grid);
        }
    }
    // And any bucket that only exists as a precomputed record label.
    for (const auto& [bucket, pts] : by_bucket) {
        if (!policy.policies.count(bucket))
            policy.policies[bucket] = fit_bucket(bucket, pts, grid);
    }
    return policy;
}

namespace {

json rules_to_json(std::span<const BucketRule> rules) {
    json arr = json::array();
    for (const auto& r : rules)
        arr.push_back(json{{"bucket", r.bucket_id}, {"priority", r.priority},
                           {"matchers", r.matchers}});
    return arr;
}

std::vector<BucketRule> rules_from_json(const json& arr) {
    std::vector<BucketRule> rules;
    for (const auto& j : arr) {
        BucketRule r;
        r.bucket_id = j.at("bucket").get<std::string>();
        r.priority = j.at("priority").get<int>();
        r.matchers = j.at("matchers").get<std::vector<std::string>>();
        rules.push_back(std::move(r));
    }
    // bucket ids and priorities must be unique
    for (size_t i = 0; i < rules.size(); ++i)
        for (size_t k = i + 1; k < rules.size(); ++k) {
            if (rules[i].bucket_id == rules[k].bucket_id)
                throw InvalidInput("duplicate bucket id: " + rules[i].bucket_id);
            if (rules[i].priority == rules[k].priority)
                throw InvalidInput("duplicate rule priority: " + std::to_string(rules[i].priority));
        }
    return rules;
}

json load_policy_json(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw InvalidInput(file + ": not valid JSON");
    if (j.value("version", 0) != 1)
        throw InvalidInput(file + ": unsupported policy file version");
    return j;
}

}  // namespace

void write_policy_file(const std::string& file, const CalibrationPolicy& policy) {
    json pol = json::object();
    for (const auto& [bucket, bp] : policy.policies) {
        pol[bucket] = json{{"temperature", bp.temperature},
                           {"bias", bp.bias},
                           {"margin", bp.margin},
                           {"default_path", path_name(bp.default_path)}};
    }
    json j{{"version", 1}, {"rules", rules_to_json(policy.rules)}, {"policies", pol}};
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + file);
}

CalibrationPolicy read_policy_file(const std::string& file) {
    json j = load_policy_json(file);
    CalibrationPolicy policy;
    try {
        policy.rules = rules_from_json(j.at("rules"));
        for (const auto& [bucket, pj] : j.at("policies").items()) {
            BucketPolicy bp;
            bp.bucket_id = bucket;
            bp.temperature = pj.at("temperature").get<double>();
            auto bias = pj.at("bias").get<std::vector<double>>();
            if (bias.size() != kNumPaths) throw InvalidInput("bias must have 5 entries");
            std::copy(bias.begin(), bias.end(), bp.bias.begin());
            bp.margin = pj.at("margin").get<double>();
            auto def = parse_path(pj.at("default_path").get<std::string>());
            if (!def) throw InvalidInput("unknown default_path");
            bp.default_path = *def;
            if (!(bp.temperature > 0.0)) throw InvalidInput("temperature must be > 0");
            if (bp.margin < 0.0) throw InvalidInput("margin must be >= 0");
            policy.policies[bucket] = bp;
        }
    } catch (const json::exception& e) {
        throw InvalidInput(file + ": policy schema violation: " + e.what());
    }
    if (!policy.policies.count(std::string(kDefaultBucket)))
        throw InvalidInput(file + ": policy file must cover the \"default\" bucket");
    for (const auto& r : policy.rules)
        if (!policy.policies.count(r.bucket_id))
            throw InvalidInput(file + ": rule bucket \"" + r.bucket_id + "\" has no policy");
    return policy;
}

std::vector<BucketRule> read_rules_file(const std::string& file) {
    json j = load_policy_json(file);
    try {
        return rules_from_json(j.at("rules"));
    } catch (const json::exception& e) {
        throw InvalidInput(file + ": rules schema violation: " + e.what());
    }
}

std::map<std::string, Path> read_bucket_paths(const std::string& file) {
    json j = load_policy_json(file);
    std::map<std::string, Path> out;
    if (!j.contains("bucket_paths")) return out;
    for (const auto& [bucket, name] : j.at("bucket_paths").items()) {
        auto p = parse_path(name.get<std::string>());
        if (!p) throw InvalidInput(file + ": unknown path for bucket " + bucket);
        out[bucket] = *p;
    }
    return out;
}

}  // namespace pathroute
