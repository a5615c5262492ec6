#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loadcast/config.hpp"

namespace loadcast {

// Every CLI run writes its manifest before finalizing outputs, so a run can
// be replayed from (config, seed, inputs) and checked against the digests.
struct RunManifest {
    std::string command;
    std::string artifact_version = kVersion;
    std::string config_hash;
    uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> input_digests;   // path, fnv1a hex
    std::vector<std::string> output_paths;
    double wall_clock_seconds = 0.0;

    static std::string file_digest(const std::string& path);
    void add_input(const std::string& path);
    void set_config(const Config& config);
    void write(const std::string& path) const;
};

}  // namespace loadcast
