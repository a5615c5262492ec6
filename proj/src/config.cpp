#include "loadcast/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "loadcast/timegrid.hpp"

namespace loadcast {

namespace {
std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw DataError("config line " + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw DataError("config key '" + key + "' is required");
    return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (...) {
        throw DataError("config key '" + key + "': bad number '" + it->second + "'");
    }
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (...) {
        throw DataError("config key '" + key + "': bad integer '" + it->second + "'");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw DataError("config key '" + key + "': bad boolean '" + it->second + "'");
}

int64_t Config::get_timestamp(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_timestamp(it->second);
}

int64_t Config::require_timestamp(const std::string& key) const {
    return parse_timestamp(require_string(key));
}

std::string Config::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

}  // namespace loadcast
