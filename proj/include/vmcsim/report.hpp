#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "vmcsim/engine.hpp"

namespace vmcsim {

/// Fixed 6-decimal rendering for CSV metric fields (locale-independent).
inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

/// Shortest round-trip rendering, always with a decimal point or exponent
/// ("1.0" rather than "1"). Used for parameter labels like "lr-mmt-1.2".
inline std::string param_label(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("param_label: to_chars failed");
    std::string s(buf, end);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

inline nlohmann::json to_json(const DataCenterConfig& dc) {
    return nlohmann::json{{"n_hosts", dc.n_hosts},
                          {"n_vms", dc.n_vms},
                          {"step_seconds", dc.step_seconds},
                          {"rng_seed", dc.rng_seed},
                          {"host_mips_options", dc.host_mips_options},
                          {"host_ram_mb", dc.host_ram_mb},
                          {"host_storage_gb", dc.host_storage_gb},
                          {"host_bandwidth_bps", dc.host_bandwidth_bps},
                          {"idle_watts", dc.idle_watts},
                          {"max_watts", dc.max_watts},
                          {"sleep_watts", dc.sleep_watts},
                          {"vm_mips_options", dc.vm_mips_options},
                          {"vm_ram_mb", dc.vm_ram_mb},
                          {"vm_storage_gb", dc.vm_storage_gb}};
}

inline nlohmann::json to_json(const SimulationConfig& cfg) {
    nlohmann::json j{{"dc", to_json(cfg.dc)},
                     {"mode", mode_name(cfg.mode)},
                     {"bandwidth_bps", cfg.bandwidth_bps},
                     {"migration_bandwidth_share", cfg.migration_bandwidth_share},
                     {"migration_degradation", cfg.migration_degradation},
                     {"horizon_steps", cfg.horizon_steps}};
    if (cfg.detector)
        j["detector"] = cfg.detector->kind_name() + ":" + param_label(cfg.detector->param);
    if (cfg.selector) j["selector"] = cfg.selector->kind_name();
    return j;
}

/// FNV-1a 64 over the canonical config serialization; identifies a run setup
/// in persisted outputs so it can be replayed exactly.
inline std::string config_hash(const SimulationConfig& cfg, const std::string& day_label,
                               std::uint64_t seed) {
    std::string canon = to_json(cfg).dump() + "|" + day_label + "|" + std::to_string(seed);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    return buf;
}

inline nlohmann::json to_json(const SimulationResult& r) {
    nlohmann::json j{{"energy_kwh", r.energy_kwh},
                     {"migrations", r.migrations},
                     {"slatah", r.slatah},
                     {"pdm", r.pdm},
                     {"sla_violation", r.sla_violation},
                     {"esv", r.esv},
                     {"sla_event_pct", r.sla_event_pct},
                     {"unplaced_total", r.unplaced_total}};
    auto& hosts = j["host_ledger"] = nlohmann::json::array();
    for (const auto& h : r.host_ledger)
        hosts.push_back({{"active_seconds", h.active_seconds},
                         {"capacity_seconds", h.capacity_seconds},
                         {"energy_kwh", h.energy_joules / 3.6e6}});
    auto& vms = j["vm_ledger"] = nlohmann::json::array();
    for (const auto& v : r.vm_ledger)
        vms.push_back({{"cr_mips_seconds", v.cr_mips_seconds},
                       {"cd_mips_seconds", v.cd_mips_seconds}});
    auto& migs = j["migration_log"] = nlohmann::json::array();
    for (const auto& m : r.migration_log)
        migs.push_back({{"vm", m.vm},
                        {"source", m.source},
                        {"dest", m.dest},
                        {"start_step", m.start_step},
                        {"duration_seconds", m.duration_seconds}});
    return j;
}

inline std::string steps_csv(const SimulationResult& r) {
    std::string out = "step,active_hosts,total_power_w,served_mips,active_mips,"
                      "migrations_started,unplaced\n";
    for (const auto& s : r.steps) {
        out += std::to_string(s.step) + ',' + std::to_string(s.active_hosts) + ',' +
               fmt6(s.total_power_w) + ',' + fmt6(s.served_mips) + ',' + fmt6(s.active_mips) +
               ',' + std::to_string(s.migrations_started) + ',' + std::to_string(s.unplaced) +
               '\n';
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

/// Persist one simulation: result.json and steps.csv under `out_dir`.
inline void write_result_files(const std::filesystem::path& out_dir, const SimulationConfig& cfg,
                               const std::string& day_label, std::uint64_t seed,
                               const SimulationResult& result) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json j = to_json(result);
    j["config"] = to_json(cfg);
    j["config_hash"] = config_hash(cfg, day_label, seed);
    j["day"] = day_label;
    j["seed"] = seed;
    write_file(out_dir / "result.json", j.dump(2) + "\n");
    write_file(out_dir / "steps.csv", steps_csv(result));
}

} // namespace vmcsim
