#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace vmcsim {

using HostId = std::int32_t;
using VmId = std::int32_t;

inline constexpr HostId kNoHost = -1;

enum class HostStatus { Active, Sleeping };

/// Host power consumption model. Linear interpolates between idle and max
/// draw over CPU utilization; FullPowerAlways pins the host at max draw and
/// exists only for the non-power-aware baseline.
struct PowerModel {
    enum class Kind { Linear, FullPowerAlways };

    Kind kind = Kind::Linear;
    double idle_watts = 175.0;
    double max_watts = 250.0;
    double sleep_watts = 0.0;

    static PowerModel linear(double idle, double max, double sleep = 0.0) {
        if (idle < 0.0 || idle > max)
            throw std::invalid_argument("PowerModel: need 0 <= idle_watts <= max_watts");
        return PowerModel{Kind::Linear, idle, max, sleep};
    }
    static PowerModel full_power(double max, double sleep = 0.0) {
        return PowerModel{Kind::FullPowerAlways, max, max, sleep};
    }
};

/// Instantaneous host draw in watts. `utilization` must lie in [0,1]; the
/// caller caps oversubscribed demand before asking for power.
inline double power_draw(const PowerModel& m, double utilization, HostStatus status) {
    if (utilization < 0.0 || utilization > 1.0)
        throw std::invalid_argument("power_draw: utilization outside [0,1]");
    if (status == HostStatus::Sleeping) return m.sleep_watts;
    if (m.kind == PowerModel::Kind::FullPowerAlways) return m.max_watts;
    return m.idle_watts + (m.max_watts - m.idle_watts) * utilization;
}

struct HostSpec {
    double mips = 0.0;          // single-core capacity
    double ram_mb = 0.0;
    double storage_gb = 0.0;
    double bandwidth_bps = 0.0; // recorded, never a binding constraint
    PowerModel power_model;
};

struct VmSpec {
    double mips = 0.0;          // requested capacity
    double ram_mb = 0.0;
    double storage_gb = 0.0;
};

/// CPU load of a host as a fraction of capacity. `utilization` is capped at
/// 1; `raw_ratio` keeps the oversubscription visible (may exceed 1).
struct CpuLoad {
    double utilization = 0.0;
    double raw_ratio = 0.0;
};

inline CpuLoad host_cpu_load(double host_mips, std::span<const double> demands_mips) {
    double total = std::accumulate(demands_mips.begin(), demands_mips.end(), 0.0);
    double raw = total / host_mips;
    return CpuLoad{std::min(1.0, raw), raw};
}

inline CpuLoad host_cpu_load(double host_mips, double total_demand_mips) {
    double raw = total_demand_mips / host_mips;
    return CpuLoad{std::min(1.0, raw), raw};
}

/// Admission check used by placement. RAM is hard; CPU admits up to
/// `admission_headroom` of capacity, counted against the VM's requested MIPS.
inline bool can_fit(double host_mips, double host_ram_mb,
                    double host_raw_demand_mips, double host_ram_used_mb,
                    const VmSpec& vm, double admission_headroom) {
    if (host_ram_used_mb + vm.ram_mb > host_ram_mb) return false;
    return (host_raw_demand_mips + vm.mips) / host_mips <= admission_headroom;
}

/// Data-center shape: catalogs are option lists sampled uniformly per
/// host/VM, everything else is shared by all instances of the kind.
struct DataCenterConfig {
    int n_hosts = 800;
    int n_vms = 1000;
    int step_seconds = 300;
    std::uint64_t rng_seed = 1;

    std::vector<double> host_mips_options{1000.0, 2000.0, 3000.0};
    double host_ram_mb = 32768.0;
    double host_storage_gb = 4096.0;
    double host_bandwidth_bps = 1e9;
    double idle_watts = 175.0;
    double max_watts = 250.0;
    double sleep_watts = 0.0;

    std::vector<double> vm_mips_options{1000.0, 750.0, 500.0, 250.0};
    double vm_ram_mb = 1024.0;
    double vm_storage_gb = 100.0;

    void validate() const {
        if (n_hosts <= 0) throw std::invalid_argument("DataCenterConfig: n_hosts must be > 0");
        if (n_vms <= 0) throw std::invalid_argument("DataCenterConfig: n_vms must be > 0");
        if (step_seconds <= 0) throw std::invalid_argument("DataCenterConfig: step_seconds must be > 0");
        if (host_mips_options.empty() || vm_mips_options.empty())
            throw std::invalid_argument("DataCenterConfig: empty spec catalog");
        for (double m : host_mips_options)
            if (m <= 0.0) throw std::invalid_argument("DataCenterConfig: host mips must be > 0");
        if (host_ram_mb <= 0.0 || host_bandwidth_bps <= 0.0)
            throw std::invalid_argument("DataCenterConfig: host ram/bandwidth must be > 0");
        if (idle_watts < 0.0 || idle_watts > max_watts)
            throw std::invalid_argument("DataCenterConfig: need 0 <= idle_watts <= max_watts");
        if (sleep_watts < 0.0)
            throw std::invalid_argument("DataCenterConfig: sleep_watts must be >= 0");
    }
};

} // namespace vmcsim
