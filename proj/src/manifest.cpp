#include "loadcast/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace loadcast {

std::string RunManifest::file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for digesting");
    uint64_t h = 1469598103934665603ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a(buf, static_cast<size_t>(in.gcount()), h);
    }
    return hex64(h);
}

void RunManifest::add_input(const std::string& path) {
    input_digests.emplace_back(path, file_digest(path));
}

void RunManifest::set_config(const Config& config) {
    config_hash = hex64(fnv1a(config.canonical_text()));
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["artifact_version"] = artifact_version;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["wall_clock_seconds"] = wall_clock_seconds;
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& [p, d] : input_digests) inputs.push_back({{"path", p}, {"digest", d}});
    j["inputs"] = inputs;
    j["outputs"] = output_paths;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

}  // namespace loadcast
