#include "pathroute/routing.hpp"

#include <algorithm>

#include "pathroute/errors.hpp"
#include "pathroute/parallel.hpp"
#include "pathroute/rng.hpp"

namespace pathroute {

namespace {

struct RouteVisitor {
    const PathOutcomeRecord& r;

    Path operator()(const FixedPolicy& p) const { return p.path; }

    Path operator()(const RandomPolicy& p) const {
        return static_cast<Path>(mix64(p.seed, fnv1a64(r.id)) % kNumPaths);
    }

    Path operator()(const ModelOnlyPolicy& p) const {
        if (!r.features)
            throw InvalidInput("MissingField: model routing needs features (record " + r.id + ")");
        return argmax_path(forward(*p.model, *r.features));
    }

    Path operator()(const BucketOnlyPolicy& p) const {
        const std::string bucket = bucket_for_record(r, p.rules);
        auto it = p.bucket_paths.find(bucket);
        return it != p.bucket_paths.end() ? it->second : Path::A;
    }

    Path operator()(const CalibratedPolicy& p) const {
        if (!r.features)
            throw InvalidInput("MissingField: calibrated routing needs features (record " +
                               r.id + ")");
        const std::string bucket = bucket_for_record(r, p.policy.rules);
        auto it = p.policy.policies.find(bucket);
        if (it == p.policy.policies.end())
            it = p.policy.policies.find(std::string(kDefaultBucket));
        if (it == p.policy.policies.end())
            throw InvalidInput("calibration policy has no entry for bucket " + bucket);
        const PathVector logits = forward(*p.model, *r.features);
        return select_path(calibrate(logits, it->second), it->second);
    }

    Path operator()(const OraclePolicy&) const {
        for (int p = 0; p < kNumPaths; ++p)
            if (r.outcomes[static_cast<size_t>(p)] == 1) return static_cast<Path>(p);
        return Path::A;
    }

    Path operator()(const ExternalPolicy&) const {
        if (!r.external_choice)
            throw InvalidInput("MissingField: record " + r.id + " has no external_choice");
        return *r.external_choice;
    }
};

struct Tally {
    size_t n = 0;
    int64_t correct = 0;
    int64_t token_sum = 0;
    std::array<size_t, kNumPaths> selected{};
    std::array<int64_t, kNumPaths> correct_by_path{};

    void add(const PathOutcomeRecord& r, Path chosen) {
        const size_t idx = static_cast<size_t>(path_index(chosen));
        ++n;
        ++selected[idx];
        correct += r.outcomes[idx];
        correct_by_path[idx] += r.outcomes[idx];
        token_sum += r.tokens[idx];
    }

    void merge(const Tally& o) {
        n += o.n;
        correct += o.correct;
        token_sum += o.token_sum;
        for (int p = 0; p < kNumPaths; ++p) {
            selected[static_cast<size_t>(p)] += o.selected[static_cast<size_t>(p)];
            correct_by_path[static_cast<size_t>(p)] += o.correct_by_path[static_cast<size_t>(p)];
        }
    }

    EvaluationReport report() const {
        EvaluationReport rep;
        rep.n = n;
        rep.accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
        rep.selected = selected;
        rep.avg_tokens = n ? static_cast<double>(token_sum) / static_cast<double>(n) : 0.0;
        for (int p = 0; p < kNumPaths; ++p) {
            const size_t s = selected[static_cast<size_t>(p)];
            rep.conditional_defined[static_cast<size_t>(p)] = s > 0;
            rep.conditional_accuracy[static_cast<size_t>(p)] =
                s ? static_cast<double>(correct_by_path[static_cast<size_t>(p)]) /
                        static_cast<double>(s)
                  : 0.0;
        }
        return rep;
    }
};

}  // namespace

Path route_record(const RoutingPolicy& policy, const PathOutcomeRecord& record) {
    return std::visit(RouteVisitor{record}, policy);
}

EvaluationReport evaluate(const RoutingPolicy& policy, std::span<const PathOutcomeRecord> records) {
    if (records.empty()) throw InvalidInput("EmptyRecordSet: nothing to evaluate");

    std::vector<Path> routed(records.size());
    parallel_for(records.size(), [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) routed[i] = route_record(policy, records[i]);
    });

    Tally overall;
    std::map<std::string, Tally> per_dataset;
    for (size_t i = 0; i < records.size(); ++i) {
        overall.add(records[i], routed[i]);
        per_dataset[records[i].dataset].add(records[i], routed[i]);
    }

    EvaluationReport rep = overall.report();
    for (const auto& [tag, tally] : per_dataset)
        rep.per_dataset.emplace_back(tag, tally.report());
    return rep;
}

double oracle_accuracy(std::span<const PathOutcomeRecord> records) {
    if (records.empty()) throw InvalidInput("EmptyRecordSet: nothing to evaluate");
    size_t any = 0;
    for (const auto& r : records)
        any += static_cast<size_t>(std::any_of(r.outcomes.begin(), r.outcomes.end(),
                                               [](int v) { return v == 1; }));
    return static_cast<double>(any) / static_cast<double>(records.size());
}

double token_cost(const RoutingPolicy& policy, std::span<const PathOutcomeRecord> records) {
    if (records.empty()) throw InvalidInput("EmptyRecordSet: nothing to evaluate");
    int64_t sum = 0;
    for (const auto& r : records)
        sum += r.tokens[static_cast<size_t>(path_index(route_record(policy, r)))];
    return static_cast<double>(sum) / static_cast<double>(records.size());
}

}  // namespace pathroute
