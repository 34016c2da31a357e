#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vmcsim/detect.hpp"
#include "vmcsim/domain.hpp"
#include "vmcsim/select.hpp"

namespace vmcsim {

/// Working copy of a host as the per-step planner sees it. Vectors of these
/// are indexed by host id.
struct PlannerHost {
    HostId id = 0;
    double mips = 0.0;
    double ram_mb = 0.0;
    PowerModel power;
    HostStatus status = HostStatus::Active;
    double raw_demand_mips = 0.0;
    double ram_used_mb = 0.0;
    std::vector<VmId> vms;
    std::span<const double> history;  // utilization, most recent last

    double utilization() const { return std::min(1.0, raw_demand_mips / mips); }
};

/// Working copy of a VM; vectors of these are indexed by VM id.
struct PlannerVm {
    VmId id = 0;
    double demand_mips = 0.0;
    double requested_mips = 0.0;
    double ram_mb = 0.0;
    HostId host = kNoHost;
    std::span<const double> history;  // demand fractions, most recent last
};

struct Move {
    VmId vm = 0;
    HostId source = kNoHost;
    HostId dest = kNoHost;
};

struct MigrationPlan {
    std::vector<Move> moves;
    std::vector<HostId> hosts_to_sleep;
    std::vector<HostId> hosts_to_wake;
    std::vector<VmId> unplaced;  // migrations cancelled, VM stays on its source
};

struct PlacementResult {
    std::vector<Move> placed;
    std::vector<VmId> unplaced;
    std::vector<HostId> woken;
};

namespace detail {

inline void place_on(PlannerHost& host, const PlannerVm& vm) {
    host.raw_demand_mips += vm.demand_mips;
    host.ram_used_mb += vm.ram_mb;
    host.vms.push_back(vm.id);
}

inline bool host_can_fit(const PlannerHost& host, const PlannerVm& vm, double headroom) {
    return can_fit(host.mips, host.ram_mb, host.raw_demand_mips, host.ram_used_mb,
                   VmSpec{vm.requested_mips, vm.ram_mb, 0.0}, headroom);
}

} // namespace detail

/// Power-aware best-fit-decreasing placement. VMs are placed in decreasing
/// order of current demand; each goes to the feasible Active host with the
/// least power increase (ties to the lowest host id), excluding its own
/// source and hosts slated for sleep. When nothing Active fits and
/// `allow_wake` is set, the lowest-id Sleeping host that can take the VM is
/// woken. Host working state is updated as placements commit.
inline PlacementResult pabfd_place(std::span<PlannerHost> hosts, std::span<const PlannerVm> vms,
                                   std::vector<VmId> to_place, double admission_headroom,
                                   bool allow_wake, std::span<const char> sleep_slated = {}) {
    std::sort(to_place.begin(), to_place.end(), [&](VmId a, VmId b) {
        const auto& va = vms[static_cast<std::size_t>(a)];
        const auto& vb = vms[static_cast<std::size_t>(b)];
        if (va.demand_mips != vb.demand_mips) return va.demand_mips > vb.demand_mips;
        return a < b;
    });

    auto slated = [&](HostId h) {
        return !sleep_slated.empty() && sleep_slated[static_cast<std::size_t>(h)];
    };

    PlacementResult result;
    for (VmId vm_id : to_place) {
        const auto& vm = vms[static_cast<std::size_t>(vm_id)];
        PlannerHost* best = nullptr;
        double best_delta = 0.0;
        for (auto& host : hosts) {
            if (host.status != HostStatus::Active) continue;
            if (host.id == vm.host || slated(host.id)) continue;
            if (!detail::host_can_fit(host, vm, admission_headroom)) continue;
            double before = power_draw(host.power, host.utilization(), HostStatus::Active);
            double after = power_draw(
                host.power, std::min(1.0, (host.raw_demand_mips + vm.demand_mips) / host.mips),
                HostStatus::Active);
            double delta = after - before;
            if (!best || delta < best_delta || (delta == best_delta && host.id < best->id)) {
                best = &host;
                best_delta = delta;
            }
        }
        if (!best && allow_wake) {
            for (auto& host : hosts) {
                if (host.status != HostStatus::Sleeping || slated(host.id)) continue;
                if (host.id == vm.host) continue;
                if (!detail::host_can_fit(host, vm, admission_headroom)) continue;
                host.status = HostStatus::Active;
                result.woken.push_back(host.id);
                best = &host;
                break;  // hosts are id-ordered, first hit is lowest id
            }
        }
        if (!best) {
            result.unplaced.push_back(vm_id);
            continue;
        }
        detail::place_on(*best, vm);
        result.placed.push_back(Move{vm_id, vm.host, best->id});
    }
    return result;
}

/// Drain an overloaded host: apply the selector repeatedly, removing the
/// pick's demand, until the detector no longer flags the adjusted history
/// (the most recent sample replaced by the reduced utilization) or no VMs
/// remain. Returns the eviction list in selection order.
inline std::vector<VmId> resolve_overload(const DetectorConfig& detector,
                                          const SelectorConfig& selector,
                                          const PlannerHost& host,
                                          std::span<const PlannerVm> vms,
                                          std::mt19937_64& rc_rng) {
    if (host.history.empty()) throw std::invalid_argument("resolve_overload: empty history");

    std::vector<double> adjusted(host.history.begin(), host.history.end());
    if (!is_overloaded(detector, adjusted))
        throw std::invalid_argument("resolve_overload: host is not overloaded");
    std::vector<VmId> remaining = host.vms;
    double raw = host.raw_demand_mips;
    std::vector<VmId> evicted;

    while (!remaining.empty() && is_overloaded(detector, adjusted)) {
        std::vector<VmCandidate> candidates;
        candidates.reserve(remaining.size());
        for (VmId id : remaining) {
            const auto& vm = vms[static_cast<std::size_t>(id)];
            candidates.push_back(VmCandidate{id, vm.ram_mb, vm.history});
        }
        VmId pick = select_vm(selector, candidates, rc_rng);
        evicted.push_back(pick);
        remaining.erase(std::find(remaining.begin(), remaining.end(), pick));
        raw -= vms[static_cast<std::size_t>(pick)].demand_mips;
        adjusted.back() = std::min(1.0, raw / host.mips);
    }
    return evicted;
}

namespace detail {

// Overload check against the working utilization: history with the last
// sample swapped for the current one.
inline bool currently_overloaded(const DetectorConfig& detector, const PlannerHost& host) {
    if (host.history.empty()) return false;
    std::vector<double> adjusted(host.history.begin(), host.history.end());
    adjusted.back() = host.utilization();
    return is_overloaded(detector, adjusted);
}

} // namespace detail

/// Underload consolidation: repeatedly pick the least-utilized eligible host
/// and try to move every one of its VMs elsewhere (never waking hosts, never
/// onto hosts already slated for sleep). Success puts the host to sleep;
/// failure keeps it and its VMs where they were. Hosts that received a
/// migration this step are not evacuation candidates, so no VM moves twice.
inline void consolidate_underloaded(std::span<PlannerHost> hosts, std::span<const PlannerVm> vms,
                                    const DetectorConfig& detector, MigrationPlan& plan) {
    const std::size_t n = hosts.size();
    std::vector<char> sleep_slated(n, 0);
    std::vector<char> received(n, 0);
    std::vector<char> kept(n, 0);
    for (const auto& m : plan.moves) received[static_cast<std::size_t>(m.dest)] = 1;
    for (HostId h : plan.hosts_to_wake) received[static_cast<std::size_t>(h)] = 1;

    const double headroom = detector.admission_headroom();
    std::vector<double> util(n, 0.0);
    std::vector<char> eligible(n, 0);

    for (;;) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& host = hosts[i];
            util[i] = host.utilization();
            eligible[i] = host.status == HostStatus::Active && !sleep_slated[i] && !received[i] &&
                          !kept[i] && !detail::currently_overloaded(detector, host);
        }
        int candidate = underloaded_candidate(util, eligible);
        if (candidate < 0) break;

        auto& source = hosts[static_cast<std::size_t>(candidate)];
        std::vector<VmId> residents = source.vms;

        // Evacuate tentatively: pull the VMs off, try to place them all.
        double saved_raw = source.raw_demand_mips;
        double saved_ram = source.ram_used_mb;
        source.vms.clear();
        source.raw_demand_mips = 0.0;
        source.ram_used_mb = 0.0;

        PlacementResult attempt =
            pabfd_place(hosts, vms, residents, headroom, /*allow_wake=*/false, sleep_slated);

        if (attempt.unplaced.empty()) {
            for (const auto& m : attempt.placed) {
                plan.moves.push_back(m);
                received[static_cast<std::size_t>(m.dest)] = 1;
            }
            sleep_slated[static_cast<std::size_t>(candidate)] = 1;
            source.status = HostStatus::Sleeping;
            plan.hosts_to_sleep.push_back(source.id);
        } else {
            // Roll back in reverse placement order, then restore the source.
            for (auto it = attempt.placed.rbegin(); it != attempt.placed.rend(); ++it) {
                auto& dest = hosts[static_cast<std::size_t>(it->dest)];
                const auto& vm = vms[static_cast<std::size_t>(it->vm)];
                dest.raw_demand_mips -= vm.demand_mips;
                dest.ram_used_mb -= vm.ram_mb;
                dest.vms.pop_back();
            }
            source.vms = std::move(residents);
            source.raw_demand_mips = saved_raw;
            source.ram_used_mb = saved_ram;
            kept[static_cast<std::size_t>(candidate)] = 1;
        }
    }
}

/// Full consolidation pass for one step: resolve overloads host by host in
/// id order, place the evictees, then consolidate underloaded hosts. Mutates
/// the working snapshot; the returned plan is what the engine commits.
inline MigrationPlan plan_step(std::span<PlannerHost> hosts, std::span<PlannerVm> vms,
                               const DetectorConfig& detector, const SelectorConfig& selector,
                               std::mt19937_64& rc_rng) {
    MigrationPlan plan;
    std::vector<VmId> to_place;

    for (auto& host : hosts) {
        if (host.status != HostStatus::Active || host.vms.empty()) continue;
        if (!is_overloaded(detector, host.history)) continue;
        std::vector<VmId> evicted = resolve_overload(detector, selector, host, vms, rc_rng);
        for (VmId id : evicted) {
            const auto& vm = vms[static_cast<std::size_t>(id)];
            host.raw_demand_mips -= vm.demand_mips;
            host.ram_used_mb -= vm.ram_mb;
            host.vms.erase(std::find(host.vms.begin(), host.vms.end(), id));
            to_place.push_back(id);
        }
    }

    if (!to_place.empty()) {
        PlacementResult placed = pabfd_place(hosts, vms, to_place,
                                             detector.admission_headroom(), /*allow_wake=*/true);
        plan.moves = std::move(placed.placed);
        plan.hosts_to_wake = std::move(placed.woken);
        plan.unplaced = placed.unplaced;
        for (const auto& m : plan.moves) vms[static_cast<std::size_t>(m.vm)].host = m.dest;
        // Cancelled migrations: the VM never left its source.
        for (VmId id : placed.unplaced) {
            auto& vm = vms[static_cast<std::size_t>(id)];
            auto& source = hosts[static_cast<std::size_t>(vm.host)];
            source.raw_demand_mips += vm.demand_mips;
            source.ram_used_mb += vm.ram_mb;
            source.vms.push_back(id);
        }
    }

    consolidate_underloaded(hosts, vms, detector, plan);
    return plan;
}

} // namespace vmcsim
