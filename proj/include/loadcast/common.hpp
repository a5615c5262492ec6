#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace loadcast {

// Error taxonomy mirrored by the CLI exit codes: usage 1, data 2, numeric 3.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a, used for config hashes and input digests in run manifests.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

std::string hex64(uint64_t v);

// Deterministic seed derivation for parallel substreams (splitmix64).
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace loadcast
