#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pathroute {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Reproducibility sidecar written next to every command's primary output:
// command name, resolved configuration, input digests, and the produced
// files. Identical manifests imply byte-identical outputs.
struct RunManifest {
    std::string command;
    nlohmann::json config;  // resolved flags and seeds
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::string> outputs;
};

std::string file_digest(const std::string& path);  // fnv1a-64 hex

void add_input(RunManifest& m, const std::string& path);

// Writes "<primary_output>.manifest.json".
void write_manifest(const RunManifest& m, const std::string& primary_output);

}  // namespace pathroute
