#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vmcsim/stats.hpp"

namespace vmcsim {

/// Per-host activity ledger accumulated by the engine.
struct HostLedger {
    double active_seconds = 0.0;
    double capacity_seconds = 0.0;  // active time spent at raw demand ratio >= 1
    double energy_joules = 0.0;
};

/// Per-VM ledger: total demanded work and the part degraded by migration.
struct VmLedger {
    double cr_mips_seconds = 0.0;
    double cd_mips_seconds = 0.0;
};

/// SLA time per active host: mean over hosts that were ever active of the
/// fraction of their active time spent at full capacity.
inline double slatah(std::span<const HostLedger> hosts) {
    double sum = 0.0;
    long n = 0;
    for (const auto& h : hosts) {
        if (h.active_seconds <= 0.0) continue;
        sum += h.capacity_seconds / h.active_seconds;
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Performance degradation due to migration: mean over all VMs of
/// Cd/Cr, with idle VMs (Cr = 0) contributing 0.
inline double pdm(std::span<const VmLedger> vms) {
    if (vms.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& v : vms) sum += v.cr_mips_seconds > 0.0 ? v.cd_mips_seconds / v.cr_mips_seconds : 0.0;
    return sum / static_cast<double>(vms.size());
}

inline double slav(double slatah_value, double pdm_value) { return slatah_value * pdm_value; }
inline double esv(double energy_kwh, double slav_value) { return energy_kwh * slav_value; }

/// The reported quantities of one run.
struct MetricsReport {
    double energy_kwh = 0.0;
    double sla_violation = 0.0;
    long migrations = 0;
    double esv = 0.0;
    double slatah = 0.0;
    double pdm = 0.0;
};

/// Field-wise medians of a group of runs.
struct MedianReport {
    double energy_kwh = 0.0;
    double sla_violation = 0.0;
    double migrations = 0.0;
    double esv = 0.0;
    double slatah = 0.0;
    double pdm = 0.0;
};

/// Median of each metric over the runs of each group (combo label).
inline std::map<std::string, MedianReport> aggregate_median(
    std::span<const std::pair<std::string, MetricsReport>> runs) {
    std::map<std::string, std::vector<const MetricsReport*>> groups;
    for (const auto& [label, report] : runs) groups[label].push_back(&report);

    std::map<std::string, MedianReport> out;
    for (const auto& [label, reports] : groups) {
        auto med = [&](auto field) {
            std::vector<double> v;
            v.reserve(reports.size());
            for (const auto* r : reports) v.push_back(field(*r));
            return median(v);
        };
        MedianReport m;
        m.energy_kwh = med([](const MetricsReport& r) { return r.energy_kwh; });
        m.sla_violation = med([](const MetricsReport& r) { return r.sla_violation; });
        m.migrations = med([](const MetricsReport& r) { return static_cast<double>(r.migrations); });
        m.esv = med([](const MetricsReport& r) { return r.esv; });
        m.slatah = med([](const MetricsReport& r) { return r.slatah; });
        m.pdm = med([](const MetricsReport& r) { return r.pdm; });
        out.emplace(label, m);
    }
    return out;
}

} // namespace vmcsim
