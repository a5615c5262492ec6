#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "loadcast/common.hpp"

namespace loadcast {

// Flat `section.key = value` configuration. Lines starting with '#' are
// comments; keys are case-sensitive.
class Config {
public:
    Config() = default;
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Timestamp keys accept ISO dates or datetimes.
    int64_t get_timestamp(const std::string& key, int64_t fallback) const;
    int64_t require_timestamp(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& values() const { return values_; }
    // Canonical text form (sorted keys), used for hashing into manifests.
    std::string canonical_text() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace loadcast
