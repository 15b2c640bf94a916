#include "pathroute/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pathroute/errors.hpp"
#include "pathroute/parallel.hpp"
#include "pathroute/rng.hpp"

namespace pathroute {

using nlohmann::json;

namespace {

// Rate such that E[max(Poisson(rate), 1)] = mean, i.e. rate + exp(-rate) = mean.
double clamped_poisson_rate(double mean) {
    if (mean < 1.0) throw InvalidInput("token mean must be >= 1 (counts are clamped at 1)");
    if (mean == 1.0) return 0.0;
    double lam = mean;
    for (int it = 0; it < 60; ++it) {
        const double f = lam + std::exp(-lam) - mean;
        const double fp = 1.0 - std::exp(-lam);
        const double next = lam - f / fp;
        if (std::abs(next - lam) < 1e-13) return next;
        lam = next;
    }
    return lam;
}

std::string pick_query(const DomainSpec& d, Rng& rng, std::string& bucket_out) {
    double total = 0.0;
    for (const auto& [_, w] : d.bucket_mix) total += w;
    double u = rng.uniform() * total;
    const std::pair<std::string, double>* chosen = &d.bucket_mix.back();
    for (const auto& bw : d.bucket_mix) {
        if (u < bw.second) {
            chosen = &bw;
            break;
        }
        u -= bw.second;
    }
    bucket_out = chosen->first;
    const auto& templates = d.bucket_templates.at(chosen->first);
    std::string q = templates[rng.below(templates.size())];
    if (auto at = q.find("{n}"); at != std::string::npos)
        q.replace(at, 3, std::to_string(rng.below(1000)));
    return q;
}

}  // namespace

void validate_config(const SynthConfig& config) {
    if (config.domains.empty()) throw InvalidInput("synth config: no domains");
    if (config.records_per_domain.size() != config.domains.size())
        throw InvalidInput("synth config: records_per_domain must match the domain list");
    if (config.correlation < 0.0 || config.correlation > 1.0)
        throw InvalidInput("synth config: correlation must lie in [0, 1] (shared-latent model)");
    if (config.block_dim < 1) throw InvalidInput("synth config: block_dim must be >= 1");
    const int f = feature_dim_for_block(config.block_dim);
    for (double m : config.token_means)
        if (m < 1.0) throw InvalidInput("synth config: token means must be >= 1");
    for (const auto& d : config.domains) {
        for (double q : d.success_probs)
            if (q < 0.0 || q > 1.0)
                throw InvalidInput("synth config: success probabilities must lie in [0, 1]");
        if (d.bucket_mix.empty()) throw InvalidInput("synth config: empty bucket mix");
        double total = 0.0;
        for (const auto& [bucket, w] : d.bucket_mix) {
            if (w < 0.0) throw InvalidInput("synth config: negative bucket weight");
            total += w;
            auto it = d.bucket_templates.find(bucket);
            if (it == d.bucket_templates.end() || it->second.empty())
                throw InvalidInput("synth config: bucket " + bucket + " has no templates");
        }
        if (total <= 0.0) throw InvalidInput("synth config: bucket mix sums to zero");
        if (d.mean.size() != f)
            throw InvalidInput("synth config: domain mean dim must equal 11*block_dim");
        if (d.path_signals.size() != kNumPaths)
            throw InvalidInput("synth config: need one signal direction per path");
        for (const auto& u : d.path_signals)
            if (u.size() != f) throw InvalidInput("synth config: signal dim must equal 11*block_dim");
        if (!(d.noise_scale > 0.0)) throw InvalidInput("synth config: noise scale must be > 0");
        if (d.signal_strength < 0.0) throw InvalidInput("synth config: signal strength must be >= 0");
    }
}

std::vector<PathOutcomeRecord> generate(const SynthConfig& config) {
    validate_config(config);

    size_t total = 0;
    std::vector<size_t> domain_of;
    for (size_t d = 0; d < config.domains.size(); ++d) {
        total += config.records_per_domain[d];
        domain_of.insert(domain_of.end(), config.records_per_domain[d], d);
    }

    std::array<double, kNumPaths> rate{};
    for (int p = 0; p < kNumPaths; ++p)
        rate[static_cast<size_t>(p)] = clamped_poisson_rate(config.token_means[static_cast<size_t>(p)]);

    // Per-domain success thresholds on the latent scale.
    std::vector<std::array<double, kNumPaths>> thresholds(config.domains.size());
    for (size_t d = 0; d < config.domains.size(); ++d)
        for (int p = 0; p < kNumPaths; ++p)
            thresholds[d][static_cast<size_t>(p)] =
                normal_quantile(config.domains[d].success_probs[static_cast<size_t>(p)]);

    const double rho = config.correlation;
    const double shared_w = std::sqrt(rho);
    const double indep_w = std::sqrt(1.0 - rho);
    const int f = feature_dim_for_block(config.block_dim);

    std::vector<PathOutcomeRecord> records(total);
    parallel_for(total, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const DomainSpec& dom = config.domains[domain_of[i]];
            Rng rng(mix64(config.seed, static_cast<uint64_t>(i)));
            PathOutcomeRecord& r = records[i];

            char idbuf[32];
            std::snprintf(idbuf, sizeof idbuf, "-%06zu", i);
            r.id = dom.domain_id + idbuf;
            r.dataset = dom.dataset_tag;
            r.query = pick_query(dom, rng, r.bucket);

            const double g = rng.normal();
            for (int p = 0; p < kNumPaths; ++p) {
                const double z = shared_w * g + indep_w * rng.normal();
                r.outcomes[static_cast<size_t>(p)] =
                    z < thresholds[domain_of[i]][static_cast<size_t>(p)] ? 1 : 0;
            }

            Eigen::VectorXd x = dom.mean;
            for (int p = 0; p < kNumPaths; ++p)
                if (r.outcomes[static_cast<size_t>(p)])
                    x += dom.signal_strength * dom.path_signals[static_cast<size_t>(p)];
            for (int k = 0; k < f; ++k) x[k] += dom.noise_scale * rng.normal();
            r.features = std::move(x);

            for (int p = 0; p < kNumPaths; ++p)
                r.tokens[static_cast<size_t>(p)] =
                    std::max<int64_t>(1, rng.poisson(rate[static_cast<size_t>(p)]));

            // A plausible backbone self-choice: uniform, upgraded to the
            // cheapest correct path 30% of the time.
            Path ext = static_cast<Path>(rng.below(kNumPaths));
            if (rng.uniform() < 0.3) {
                for (int p = 0; p < kNumPaths; ++p)
                    if (r.outcomes[static_cast<size_t>(p)]) {
                        ext = static_cast<Path>(p);
                        break;
                    }
            }
            r.external_choice = ext;
        }
    });
    return records;
}

std::array<double, 32> outcome_pattern_probs(const std::array<double, kNumPaths>& q, double rho) {
    if (rho < 0.0 || rho > 1.0)
        throw InvalidInput("outcome_pattern_probs: correlation outside the [0, 1] model range");
    std::array<double, 32> probs{};

    if (rho == 0.0) {
        for (int mask = 0; mask < 32; ++mask) {
            double p = 1.0;
            for (int b = 0; b < kNumPaths; ++b)
                p *= (mask >> b & 1) ? q[static_cast<size_t>(b)] : 1.0 - q[static_cast<size_t>(b)];
            probs[static_cast<size_t>(mask)] = p;
        }
        return probs;
    }

    std::array<double, kNumPaths> t{};
    for (int p = 0; p < kNumPaths; ++p) t[static_cast<size_t>(p)] = normal_quantile(q[static_cast<size_t>(p)]);

    if (rho == 1.0) {
        // All latents coincide: the success set is {p : g < t_p}, a step
        // function of g; realizable patterns are slabs between thresholds.
        std::array<double, kNumPaths + 1> cuts{};
        std::array<double, kNumPaths> sorted = t;
        std::sort(sorted.begin(), sorted.end());
        for (int k = 0; k <= kNumPaths; ++k) {
            const double lo = k == 0 ? -1e18 : sorted[static_cast<size_t>(k - 1)];
            const double hi = k == kNumPaths ? 1e18 : sorted[static_cast<size_t>(k)];
            if (!(hi > lo)) continue;
            const double mass = normal_cdf(hi) - normal_cdf(lo);
            const double mid = std::clamp((lo + hi) / 2.0, -1e17, 1e17);
            int mask = 0;
            for (int p = 0; p < kNumPaths; ++p)
                if (mid < t[static_cast<size_t>(p)]) mask |= 1 << p;
            probs[static_cast<size_t>(mask)] += mass;
            (void)cuts;
        }
        return probs;
    }

    // Simpson quadrature over the shared latent.
    const double sw = std::sqrt(rho), iw = std::sqrt(1.0 - rho);
    const int n = 4000;  // even
    const double lo = -10.0, hi = 10.0, h = (hi - lo) / n;
    for (int k = 0; k <= n; ++k) {
        const double g = lo + h * k;
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double phi = std::exp(-0.5 * g * g) * 0.3989422804014326779399461;
        std::array<double, kNumPaths> cond{};
        for (int p = 0; p < kNumPaths; ++p)
            cond[static_cast<size_t>(p)] = normal_cdf((t[static_cast<size_t>(p)] - sw * g) / iw);
        for (int mask = 0; mask < 32; ++mask) {
            double prod = 1.0;
            for (int b = 0; b < kNumPaths; ++b)
                prod *= (mask >> b & 1) ? cond[static_cast<size_t>(b)]
                                        : 1.0 - cond[static_cast<size_t>(b)];
            probs[static_cast<size_t>(mask)] += w * phi * prod;
        }
    }
    for (auto& p : probs) p *= h / 3.0;
    return probs;
}

namespace {

double domain_oracle(const DomainSpec& d, double rho) {
    if (rho == 0.0) {
        double fail = 1.0;
        for (double q : d.success_probs) fail *= 1.0 - q;
        return 1.0 - fail;
    }
    return 1.0 - outcome_pattern_probs(d.success_probs, rho)[0];
}

std::vector<double> domain_weights(const SynthConfig& config) {
    double total = 0.0;
    for (size_t n : config.records_per_domain) total += static_cast<double>(n);
    if (total <= 0.0) throw InvalidInput("expected_oracle: zero records configured");
    std::vector<double> w;
    for (size_t n : config.records_per_domain) w.push_back(static_cast<double>(n) / total);
    return w;
}

}  // namespace

double expected_oracle(const SynthConfig& config) {
    validate_config(config);
    const auto w = domain_weights(config);
    double acc = 0.0;
    for (size_t d = 0; d < config.domains.size(); ++d)
        acc += w[d] * domain_oracle(config.domains[d], config.correlation);
    return acc;
}

std::array<double, kNumPaths> expected_fixed(const SynthConfig& config) {
    validate_config(config);
    const auto w = domain_weights(config);
    std::array<double, kNumPaths> acc{};
    for (size_t d = 0; d < config.domains.size(); ++d)
        for (int p = 0; p < kNumPaths; ++p)
            acc[static_cast<size_t>(p)] +=
                w[d] * config.domains[d].success_probs[static_cast<size_t>(p)];
    return acc;
}

namespace {

const std::vector<std::string>& templates_for(const std::string& bucket) {
    static const std::vector<std::string> simple{
        "How many objects appear in scene {n}?",
        "Count the circles in panel {n}.",
        "Is there a red marker in sample {n}? Answer yes or no.",
    };
    static const std::vector<std::string> structured{
        "In the geometry diagram {n}, find the missing angle.",
        "The chart in figure {n} compares two series; which grows faster?",
        "Using the circuit diagram {n}, determine the equivalent resistance.",
    };
    static const std::vector<std::string> fallback{
        "Describe the relationship shown in item {n}.",
        "What is the best label for example {n}?",
        "Explain the phenomenon presented in case {n}.",
    };
    if (bucket == "simple") return simple;
    if (bucket == "structured") return structured;
    return fallback;
}

DomainSpec make_domain(const std::string& id, const std::string& tag,
                       const std::array<double, kNumPaths>& q,
                       const std::vector<std::pair<std::string, double>>& mix, int block_dim,
                       double mean_scale, double signal_strength, double noise_scale, Rng& struct_rng,
                       const Eigen::VectorXd* mean_offset = nullptr) {
    DomainSpec d;
    d.domain_id = id;
    d.dataset_tag = tag;
    d.success_probs = q;
    d.bucket_mix = mix;
    for (const auto& [bucket, _] : mix) d.bucket_templates[bucket] = templates_for(bucket);
    const int f = feature_dim_for_block(block_dim);
    d.mean.resize(f);
    for (int k = 0; k < f; ++k) d.mean[k] = mean_scale * struct_rng.normal();
    if (mean_offset) d.mean += *mean_offset;
    for (int p = 0; p < kNumPaths; ++p) {
        Eigen::VectorXd u(f);
        for (int k = 0; k < f; ++k) u[k] = struct_rng.normal();
        u.normalize();
        d.path_signals.push_back(std::move(u) * std::sqrt(static_cast<double>(f)));
    }
    d.signal_strength = signal_strength;
    d.noise_scale = noise_scale;
    return d;
}

std::array<double, kNumPaths> favored(int path, double hi = 0.8, double lo = 0.35) {
    std::array<double, kNumPaths> q;
    q.fill(lo);
    q[static_cast<size_t>(path)] = hi;
    return q;
}

}  // namespace

std::vector<std::string> preset_names() { return {"diversity", "homogeneous", "domain-shift"}; }

SynthConfig preset(std::string_view name, uint64_t seed, std::optional<size_t> total_records) {
    SynthConfig config;
    config.seed = seed;
    config.block_dim = 8;

    // Scenario structure comes from a fixed internal stream so that the same
    // preset always describes the same world; the user seed only moves the
    // record draws.
    Rng structure(fnv1a64(name));

    const std::vector<std::pair<std::string, double>> even_mix{
        {"simple", 0.4}, {"structured", 0.3}, {"default", 0.3}};

    if (name == "diversity") {
        config.correlation = 0.0;
        for (int p = 0; p < kNumPaths; ++p) {
            config.domains.push_back(make_domain("div" + std::to_string(p), "d" + std::to_string(p),
                                                 favored(p), even_mix, config.block_dim,
                                                 /*mean_scale=*/2.0, /*signal=*/6.0,
                                                 /*noise=*/1.0, structure));
        }
        config.records_per_domain.assign(config.domains.size(), 2000);
    } else if (name == "homogeneous") {
        config.correlation = 0.3;
        config.domains.push_back(make_domain("homog", "homog",
                                             {0.65, 0.65, 0.68, 0.70, 0.66}, even_mix,
                                             config.block_dim, 2.0, 1.0, 1.0, structure));
        config.records_per_domain.assign(1, 10000);
    } else if (name == "domain-shift") {
        config.correlation = 0.2;
        struct Row {
            int path;
            std::vector<std::pair<std::string, double>> mix;
        };
        const std::vector<Row> trains{
            {0, {{"simple", 0.7}, {"structured", 0.15}, {"default", 0.15}}},
            {2, {{"simple", 0.15}, {"structured", 0.15}, {"default", 0.7}}},
            {3, {{"simple", 0.15}, {"structured", 0.7}, {"default", 0.15}}},
        };
        int idx = 0;
        for (const auto& row : trains) {
            config.domains.push_back(make_domain("train" + std::to_string(idx), "train",
                                                 favored(row.path), row.mix, config.block_dim,
                                                 2.0, /*signal=*/2.5, /*noise=*/1.5, structure));
            ++idx;
        }
        // Test domain: affinity permuted to p_H, feature mean pushed far away.
        Eigen::VectorXd offset(feature_dim_for_block(config.block_dim));
        for (int k = 0; k < offset.size(); ++k) offset[k] = 6.0 * structure.normal();
        config.domains.push_back(make_domain("test", "test", favored(4), even_mix,
                                             config.block_dim, 2.0, 2.5, 1.5, structure,
                                             &offset));
        config.records_per_domain.assign(config.domains.size(), 2500);
    } else {
        std::string names;
        for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
        throw InvalidInput("unknown preset '" + std::string(name) + "' (valid: " + names + ")");
    }

    if (total_records) {
        const size_t nd = config.domains.size();
        const size_t base = *total_records / nd;
        const size_t rem = *total_records % nd;
        for (size_t d = 0; d < nd; ++d) config.records_per_domain[d] = base + (d < rem ? 1 : 0);
    }
    return config;
}

namespace {

json vec_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from(const json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_synth_config(const std::string& file, const SynthConfig& config) {
    json domains = json::array();
    for (const auto& d : config.domains) {
        json mix = json::array();
        for (const auto& [bucket, w] : d.bucket_mix)
            mix.push_back(json{{"bucket", bucket}, {"weight", w}});
        domains.push_back(json{{"domain_id", d.domain_id},
                               {"dataset_tag", d.dataset_tag},
                               {"success_probs", d.success_probs},
                               {"bucket_mix", mix},
                               {"bucket_templates", d.bucket_templates},
                               {"mean", vec_json(d.mean)},
                               {"path_signals", [&] {
                                    json arr = json::array();
                                    for (const auto& u : d.path_signals) arr.push_back(vec_json(u));
                                    return arr;
                                }()},
                               {"signal_strength", d.signal_strength},
                               {"noise_scale", d.noise_scale}});
    }
    json j{{"seed", config.seed},
           {"correlation", config.correlation},
           {"block_dim", config.block_dim},
           {"token_means", config.token_means},
           {"records_per_domain", config.records_per_domain},
           {"domains", domains}};
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + file);
}

SynthConfig read_synth_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw InvalidInput(file + ": not valid JSON");
    SynthConfig config;
    try {
        config.seed = j.at("seed").get<uint64_t>();
        config.correlation = j.at("correlation").get<double>();
        config.block_dim = j.at("block_dim").get<int>();
        config.token_means = j.at("token_means").get<std::array<double, kNumPaths>>();
        config.records_per_domain = j.at("records_per_domain").get<std::vector<size_t>>();
        for (const auto& dj : j.at("domains")) {
            DomainSpec d;
            d.domain_id = dj.at("domain_id").get<std::string>();
            d.dataset_tag = dj.at("dataset_tag").get<std::string>();
            d.success_probs = dj.at("success_probs").get<std::array<double, kNumPaths>>();
            for (const auto& m : dj.at("bucket_mix"))
                d.bucket_mix.emplace_back(m.at("bucket").get<std::string>(),
                                          m.at("weight").get<double>());
            d.bucket_templates =
                dj.at("bucket_templates").get<std::map<std::string, std::vector<std::string>>>();
            d.mean = vec_from(dj.at("mean"));
            for (const auto& u : dj.at("path_signals")) d.path_signals.push_back(vec_from(u));
            d.signal_strength = dj.at("signal_strength").get<double>();
            d.noise_scale = dj.at("noise_scale").get<double>();
            config.domains.push_back(std::move(d));
        }
    } catch (const json::exception& e) {
        throw InvalidInput(file + ": synth config schema violation: " + e.what());
    }
    validate_config(config);
    return config;
}

}  // namespace pathroute
