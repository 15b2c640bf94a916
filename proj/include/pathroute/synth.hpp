#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathroute/records.hpp"

namespace pathroute {

// Generative description of one domain: per-path success probabilities, a
// query-form bucket mixture with templates, and a linear feature model
//   features = mean + sum_p r_p * signal_strength * path_signals[p] + noise.
// signal_strength = 0 removes every path cue from the features.
struct DomainSpec {
    std::string domain_id;
    std::string dataset_tag;
    std::array<double, kNumPaths> success_probs{};
    std::vector<std::pair<std::string, double>> bucket_mix;
    std::map<std::string, std::vector<std::string>> bucket_templates;
    Eigen::VectorXd mean;                       // dim 11*D
    std::vector<Eigen::VectorXd> path_signals;  // 5 vectors, dim 11*D
    double signal_strength = 0.0;
    double noise_scale = 1.0;
};

// Outcomes are coupled through one shared Gaussian latent (equicorrelation
// copula), so `correlation` must lie in [0, 1]. Token counts are Poisson
// with a minimum of 1; the Poisson rate is solved so that the clamped mean
// equals the configured mean (which therefore must be >= 1).
struct SynthConfig {
    std::vector<DomainSpec> domains;
    std::vector<size_t> records_per_domain;
    std::array<double, kNumPaths> token_means{1.2, 74.9, 231.4, 291.5, 295.7};
    double correlation = 0.3;
    uint64_t seed = 0;
    int block_dim = 8;  // D; feature dim = 11*D
};

void validate_config(const SynthConfig& config);

// Deterministic per (config, seed); records are seeded individually by index
// so generation parallelizes without changing output.
std::vector<PathOutcomeRecord> generate(const SynthConfig& config);

// Probability of each of the 32 outcome patterns under the copula model
// (bit p of the index = path p succeeds).
std::array<double, 32> outcome_pattern_probs(const std::array<double, kNumPaths>& q, double rho);

// Domain mixture (weighted by records per domain) of the probability that at
// least one path succeeds.
double expected_oracle(const SynthConfig& config);

// Per-path fixed-route success rates under the same mixture.
std::array<double, kNumPaths> expected_fixed(const SynthConfig& config);

// Named scenarios:
//   "diversity"    five domains, each favoring a different path
//   "homogeneous"  one domain with nearly uniform path quality
//   "domain-shift" three train domains plus one test domain with permuted
//                  path affinities and a shifted feature mean
// The scenario structure is fixed; `seed` drives the record draws.
// `total_records` overrides the preset corpus size (split evenly, remainder
// to earlier domains).
SynthConfig preset(std::string_view name, uint64_t seed,
                   std::optional<size_t> total_records = std::nullopt);

std::vector<std::string> preset_names();

// Full config round-trip, also used for the sidecar provenance echo.
void write_synth_config(const std::string& file, const SynthConfig& config);
SynthConfig read_synth_config(const std::string& file);

}  // namespace pathroute
