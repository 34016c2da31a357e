#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vmcsim/engine.hpp"

namespace vmcsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace kv {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Parse a "key = value" file. '#' starts a comment; blank lines are
/// skipped. Order is preserved.
inline std::vector<std::pair<std::string, std::string>> parse_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected \"key = value\"");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
        entries.emplace_back(key, value);
    }
    return entries;
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key \"" + key + "\": cannot parse number \"" + value + "\"");
    }
}

inline long to_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key \"" + key + "\": cannot parse integer \"" + value + "\"");
    }
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(to_double(key, item));
    if (out.empty()) throw ConfigError("key \"" + key + "\": empty list");
    return out;
}

} // namespace kv

/// Apply one data-center / engine key to a SimulationConfig. Returns false
/// when the key is not recognized (callers layering more keys on top decide
/// whether that is an error).
inline bool apply_sim_key(SimulationConfig& cfg, const std::string& key,
                          const std::string& value) {
    auto& dc = cfg.dc;
    if (key == "hosts") dc.n_hosts = static_cast<int>(kv::to_long(key, value));
    else if (key == "vms") dc.n_vms = static_cast<int>(kv::to_long(key, value));
    else if (key == "step_seconds") dc.step_seconds = static_cast<int>(kv::to_long(key, value));
    else if (key == "seed") dc.rng_seed = static_cast<std::uint64_t>(kv::to_long(key, value));
    else if (key == "host_mips") dc.host_mips_options = kv::to_doubles(key, value);
    else if (key == "host_ram_mb") dc.host_ram_mb = kv::to_double(key, value);
    else if (key == "host_storage_gb") dc.host_storage_gb = kv::to_double(key, value);
    else if (key == "host_bandwidth_bps") dc.host_bandwidth_bps = kv::to_double(key, value);
    else if (key == "idle_watts") dc.idle_watts = kv::to_double(key, value);
    else if (key == "max_watts") dc.max_watts = kv::to_double(key, value);
    else if (key == "sleep_watts") dc.sleep_watts = kv::to_double(key, value);
    else if (key == "vm_mips") dc.vm_mips_options = kv::to_doubles(key, value);
    else if (key == "vm_ram_mb") dc.vm_ram_mb = kv::to_double(key, value);
    else if (key == "vm_storage_gb") dc.vm_storage_gb = kv::to_double(key, value);
    else if (key == "bandwidth_bps") cfg.bandwidth_bps = kv::to_double(key, value);
    else if (key == "migration_bandwidth_share") cfg.migration_bandwidth_share = kv::to_double(key, value);
    else if (key == "migration_degradation") cfg.migration_degradation = kv::to_double(key, value);
    else if (key == "horizon") cfg.horizon_steps = static_cast<int>(kv::to_long(key, value));
    else return false;
    return true;
}

/// Load a simulate-config file (data-center and engine keys only).
inline SimulationConfig load_sim_config(const std::filesystem::path& path) {
    SimulationConfig cfg;
    for (const auto& [key, value] : kv::parse_file(path))
        if (!apply_sim_key(cfg, key, value))
            throw ConfigError(path.string() + ": unknown key \"" + key + "\"");
    return cfg;
}

} // namespace vmcsim
