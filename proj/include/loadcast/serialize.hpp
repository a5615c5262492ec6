#pragma once

#include <string>

#include "loadcast/ensemble.hpp"
#include "loadcast/gam.hpp"
#include "loadcast/kalman.hpp"

namespace loadcast {

// Versioned binary container. Every payload starts with the magic, a format
// version and a payload tag, so files are self-describing. GAM banks embed
// their formula text and knot vectors verbatim.

inline constexpr const char* kContainerMagic = "LCBIN";
inline constexpr uint32_t kContainerVersion = 1;

void save_gam_bank(const std::string& path, const GamBank& bank);
GamBank load_gam_bank(const std::string& path);

void save_forest(const std::string& path, const Forest& forest);
Forest load_forest(const std::string& path);

void save_gam_boost(const std::string& path, const GamBoostModel& model);
GamBoostModel load_gam_boost(const std::string& path);

// Per-chain state snapshots for warm restarts of the adaptation CLI.
struct KalmanSnapshot {
    std::vector<KalmanState> states;  // one per half-hour chain
    std::vector<NoiseConfig> noises;
};

void save_kalman_snapshot(const std::string& path, const KalmanSnapshot& snap);
KalmanSnapshot load_kalman_snapshot(const std::string& path);

// Tag of the payload stored at `path` ("gam_bank", "forest", ...).
std::string container_tag(const std::string& path);

}  // namespace loadcast
