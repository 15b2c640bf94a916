#include "pathroute/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pathroute/errors.hpp"
#include "pathroute/rng.hpp"

namespace pathroute {

using nlohmann::json;

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for digest");
    std::stringstream buf;
    buf << in.rdbuf();
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(buf.str())));
    return hex;
}

void add_input(RunManifest& m, const std::string& path) {
    m.inputs.emplace_back(path, file_digest(path));
}

void write_manifest(const RunManifest& m, const std::string& primary_output) {
    json inputs = json::array();
    for (const auto& [path, digest] : m.inputs)
        inputs.push_back(json{{"path", path}, {"digest", digest}});
    json j{{"command", m.command},
           {"tool_version", kToolVersion},
           {"config", m.config},
           {"inputs", inputs},
           {"outputs", m.outputs}};
    const std::string file = primary_output + ".manifest.json";
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + file);
}

}  // namespace pathroute
