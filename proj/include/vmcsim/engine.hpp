#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vmcsim/detect.hpp"
#include "vmcsim/domain.hpp"
#include "vmcsim/metrics.hpp"
#include "vmcsim/placement.hpp"
#include "vmcsim/rng.hpp"
#include "vmcsim/select.hpp"
#include "vmcsim/workload.hpp"

namespace vmcsim {

enum class SimMode { Consolidation, Dvfs, Npa };

inline std::string mode_name(SimMode mode) {
    switch (mode) {
        case SimMode::Consolidation: return "consolidation";
        case SimMode::Dvfs: return "dvfs";
        case SimMode::Npa: return "npa";
    }
    return "?";
}

inline SimMode parse_mode(const std::string& token) {
    if (token == "consolidation") return SimMode::Consolidation;
    if (token == "dvfs") return SimMode::Dvfs;
    if (token == "npa") return SimMode::Npa;
    throw std::invalid_argument("unknown mode \"" + token + "\"");
}

struct SimulationConfig {
    DataCenterConfig dc;
    SimMode mode = SimMode::Consolidation;
    std::optional<DetectorConfig> detector;
    std::optional<SelectorConfig> selector;
    double bandwidth_bps = 1e9;
    double migration_bandwidth_share = 0.5;
    double migration_degradation = 0.10;
    int horizon_steps = 0;  // 0: run for the full trace length

    void validate() const {
        dc.validate();
        if (mode == SimMode::Consolidation) {
            if (!detector || !selector)
                throw std::invalid_argument("consolidation mode needs a detector and a selector");
            detector->validate();
            selector->validate();
        }
        if (bandwidth_bps <= 0.0 || migration_bandwidth_share <= 0.0 ||
            migration_bandwidth_share > 1.0)
            throw std::invalid_argument("bad migration bandwidth configuration");
        if (migration_degradation < 0.0 || migration_degradation > 1.0)
            throw std::invalid_argument("migration_degradation must lie in [0,1]");
        if (horizon_steps < 0) throw std::invalid_argument("horizon_steps must be >= 0");
    }

    /// Seconds to transfer a VM's RAM over the migration share of the link.
    double migration_duration_seconds(double vm_ram_mb) const {
        return vm_ram_mb * 8.0 * 1048576.0 / (migration_bandwidth_share * bandwidth_bps);
    }
};

struct MigrationRecord {
    VmId vm = 0;
    HostId source = kNoHost;
    HostId dest = kNoHost;
    int start_step = 0;
    double duration_seconds = 0.0;
};

struct StepDiag {
    int step = 0;
    int active_hosts = 0;
    double total_power_w = 0.0;
    double served_mips = 0.0;
    double active_mips = 0.0;
    int migrations_started = 0;
    int unplaced = 0;
};

struct SimulationResult {
    double energy_kwh = 0.0;
    long migrations = 0;
    double slatah = 0.0;
    double pdm = 0.0;
    double sla_violation = 0.0;
    double esv = 0.0;
    double sla_event_pct = 0.0;  // saturated (host,step) pairs among active-host steps
    long unplaced_total = 0;
    std::vector<StepDiag> steps;
    std::vector<HostLedger> host_ledger;
    std::vector<VmLedger> vm_ledger;
    std::vector<MigrationRecord> migration_log;

    MetricsReport metrics() const {
        return MetricsReport{energy_kwh, sla_violation, migrations, esv, slatah, pdm};
    }
};

/// One deterministic trace-driven simulation. Build, call run() once.
class Simulation {
public:
    Simulation(const SimulationConfig& cfg, const TraceSet& traces, std::span<const int> binding)
        : cfg_(cfg) {
        cfg_.validate();
        const auto& dc = cfg_.dc;
        if (static_cast<int>(binding.size()) != dc.n_vms)
            throw std::invalid_argument("trace binding does not cover every VM");

        horizon_ = cfg_.horizon_steps > 0 ? cfg_.horizon_steps
                                          : static_cast<int>(traces.sample_count());
        if (horizon_ <= 0) throw std::invalid_argument("empty simulation horizon");
        for (int b : binding) {
            if (b < 0 || b >= static_cast<int>(traces.traces.size()))
                throw std::invalid_argument("trace binding index out of range");
            if (static_cast<int>(traces.traces[static_cast<std::size_t>(b)].samples.size()) < horizon_)
                throw std::invalid_argument(
                    "trace " + traces.traces[static_cast<std::size_t>(b)].source_id +
                    " is shorter than the simulation horizon");
        }

        int window = 12;
        if (cfg_.detector) window = std::max(window, cfg_.detector->window_len);
        if (cfg_.selector) window = std::max(window, cfg_.selector->window_len);
        history_cap_ = static_cast<std::size_t>(window);

        std::uint64_t rc_seed = cfg_.selector ? cfg_.selector->rng_seed : 0;
        rc_rng_.seed(mix_seed(dc.rng_seed ^ rc_seed, 3));

        result_.host_ledger.resize(static_cast<std::size_t>(dc.n_hosts));
        result_.vm_ledger.resize(static_cast<std::size_t>(dc.n_vms));

        build_hosts();
        build_vms(traces, binding);
        place_initial();
    }

    SimulationResult run() {
        if (ran_) throw std::logic_error("Simulation::run may only be called once");
        ran_ = true;
        result_.steps.reserve(static_cast<std::size_t>(horizon_));
        for (int t = 0; t < horizon_; ++t) step(t);
        finalize();
        return std::move(result_);
    }

    int horizon() const { return horizon_; }

private:
    struct HostState {
        HostSpec spec;
        HostStatus status = HostStatus::Active;
        std::vector<VmId> vms;
        std::vector<double> history;  // utilization ring, most recent last
        double raw_demand = 0.0;
        double ram_used = 0.0;
    };
    struct VmState {
        VmSpec spec;
        HostId host = kNoHost;
        const std::vector<double>* samples = nullptr;
        std::vector<double> history;  // demand fraction ring
        double demand = 0.0;
        double degraded_until = 0.0;  // wall-clock end of the migration window
    };

    void push_history(std::vector<double>& ring, double v) const {
        if (ring.size() == history_cap_) ring.erase(ring.begin());
        ring.push_back(v);
    }

    void build_hosts() {
        const auto& dc = cfg_.dc;
        std::mt19937_64 rng(mix_seed(dc.rng_seed, 1));
        hosts_.resize(static_cast<std::size_t>(dc.n_hosts));
        for (auto& host : hosts_) {
            double mips = dc.host_mips_options[next_below(rng, dc.host_mips_options.size())];
            PowerModel pm = cfg_.mode == SimMode::Npa
                                ? PowerModel::full_power(dc.max_watts, dc.sleep_watts)
                                : PowerModel::linear(dc.idle_watts, dc.max_watts, dc.sleep_watts);
            host.spec = HostSpec{mips, dc.host_ram_mb, dc.host_storage_gb, dc.host_bandwidth_bps, pm};
            host.history.reserve(history_cap_);
        }
    }

    void build_vms(const TraceSet& traces, std::span<const int> binding) {
        const auto& dc = cfg_.dc;
        std::mt19937_64 rng(mix_seed(dc.rng_seed, 2));
        vms_.resize(static_cast<std::size_t>(dc.n_vms));
        for (std::size_t i = 0; i < vms_.size(); ++i) {
            double mips = dc.vm_mips_options[next_below(rng, dc.vm_mips_options.size())];
            vms_[i].spec = VmSpec{mips, dc.vm_ram_mb, dc.vm_storage_gb};
            vms_[i].samples = &traces.traces[static_cast<std::size_t>(binding[i])].samples;
            vms_[i].history.reserve(history_cap_);
        }
    }

    // Initial placement: PABFD over requested capacity with full headroom,
    // every host active. A VM set the data center cannot admit is a
    // configuration error, not a simulation outcome.
    void place_initial() {
        auto snapshot = make_snapshot();
        std::vector<VmId> all(vms_.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i] = static_cast<VmId>(i);
            snapshot.vms[i].demand_mips = vms_[i].spec.mips;
        }
        PlacementResult placed =
            pabfd_place(snapshot.hosts, snapshot.vms, all, 1.0, /*allow_wake=*/false);
        if (!placed.unplaced.empty())
            throw std::invalid_argument("data center cannot admit the initial VM set (" +
                                        std::to_string(placed.unplaced.size()) +
                                        " VMs unplaceable)");
        for (const auto& m : placed.placed) {
            vms_[static_cast<std::size_t>(m.vm)].host = m.dest;
            auto& host = hosts_[static_cast<std::size_t>(m.dest)];
            host.vms.push_back(m.vm);
            host.ram_used += vms_[static_cast<std::size_t>(m.vm)].spec.ram_mb;
        }
    }

    struct Snapshot {
        std::vector<PlannerHost> hosts;
        std::vector<PlannerVm> vms;
    };

    Snapshot make_snapshot() {
        Snapshot snap;
        snap.hosts.reserve(hosts_.size());
        for (std::size_t i = 0; i < hosts_.size(); ++i) {
            const auto& h = hosts_[i];
            snap.hosts.push_back(PlannerHost{static_cast<HostId>(i), h.spec.mips, h.spec.ram_mb,
                                             h.spec.power_model, h.status, h.raw_demand,
                                             h.ram_used, h.vms, h.history});
        }
        snap.vms.reserve(vms_.size());
        for (std::size_t i = 0; i < vms_.size(); ++i) {
            const auto& v = vms_[i];
            snap.vms.push_back(PlannerVm{static_cast<VmId>(i), v.demand, v.spec.mips,
                                         v.spec.ram_mb, v.host, v.history});
        }
        return snap;
    }

    void step(int t) {
        const double dt = static_cast<double>(cfg_.dc.step_seconds);
        const double t0 = static_cast<double>(t) * dt;
        StepDiag diag;
        diag.step = t;

        // Demands and histories.
        for (auto& vm : vms_) {
            double f = (*vm.samples)[static_cast<std::size_t>(t)];
            vm.demand = f * vm.spec.mips;
            push_history(vm.history, f);
        }
        for (auto& host : hosts_) {
            double raw = 0.0;
            for (VmId id : host.vms) raw += vms_[static_cast<std::size_t>(id)].demand;
            host.raw_demand = raw;
            push_history(host.history, std::min(1.0, raw / host.spec.mips));
        }

        // Plan and commit migrations.
        if (cfg_.mode == SimMode::Consolidation) {
            auto snapshot = make_snapshot();
            MigrationPlan plan =
                plan_step(snapshot.hosts, snapshot.vms, *cfg_.detector, *cfg_.selector, rc_rng_);
            commit(plan, t, t0);
            diag.migrations_started = static_cast<int>(plan.moves.size());
            diag.unplaced = static_cast<int>(plan.unplaced.size());
            result_.unplaced_total += static_cast<long>(plan.unplaced.size());
        }

        // Energy and SLA accounting at post-commit state.
        for (std::size_t i = 0; i < hosts_.size(); ++i) {
            auto& host = hosts_[i];
            double ratio = host.raw_demand / host.spec.mips;
            double u = host.status == HostStatus::Active ? std::min(1.0, ratio) : 0.0;
            double watts = power_draw(host.spec.power_model, u, host.status);
            result_.host_ledger[i].energy_joules += watts * dt;
            diag.total_power_w += watts;
            if (host.status == HostStatus::Active) {
                ++diag.active_hosts;
                diag.active_mips += host.spec.mips;
                diag.served_mips += std::min(host.raw_demand, host.spec.mips);
                result_.host_ledger[i].active_seconds += dt;
                ++active_host_steps_;
                if (ratio >= 1.0) {
                    result_.host_ledger[i].capacity_seconds += dt;
                    ++saturated_host_steps_;
                }
            }
        }
        for (std::size_t i = 0; i < vms_.size(); ++i) {
            auto& vm = vms_[i];
            result_.vm_ledger[i].cr_mips_seconds += vm.demand * dt;
            double overlap = std::clamp(vm.degraded_until - t0, 0.0, dt);
            if (overlap > 0.0)
                result_.vm_ledger[i].cd_mips_seconds +=
                    cfg_.migration_degradation * vm.demand * overlap;
        }

        result_.steps.push_back(diag);
        audit();
    }

    void commit(const MigrationPlan& plan, int t, double t0) {
        for (HostId id : plan.hosts_to_wake)
            hosts_[static_cast<std::size_t>(id)].status = HostStatus::Active;
        for (const auto& m : plan.moves) {
            auto& vm = vms_[static_cast<std::size_t>(m.vm)];
            auto& src = hosts_[static_cast<std::size_t>(m.source)];
            auto& dst = hosts_[static_cast<std::size_t>(m.dest)];
            src.vms.erase(std::find(src.vms.begin(), src.vms.end(), m.vm));
            src.raw_demand -= vm.demand;
            src.ram_used -= vm.spec.ram_mb;
            dst.vms.push_back(m.vm);
            dst.raw_demand += vm.demand;
            dst.ram_used += vm.spec.ram_mb;
            vm.host = m.dest;

            double duration = cfg_.migration_duration_seconds(vm.spec.ram_mb);
            result_.migration_log.push_back(MigrationRecord{m.vm, m.source, m.dest, t, duration});
            // Degradation windows union rather than stack, so Cd <= k * Cr.
            vm.degraded_until = std::max(vm.degraded_until, t0 + duration);
        }
        result_.migrations += static_cast<long>(plan.moves.size());
        for (HostId id : plan.hosts_to_sleep) {
            auto& host = hosts_[static_cast<std::size_t>(id)];
            if (!host.vms.empty())
                throw std::logic_error("commit: sleeping a non-empty host");
            host.status = HostStatus::Sleeping;
            host.raw_demand = 0.0;
            host.ram_used = 0.0;
        }
    }

    // Residency audit: every VM on exactly one active host.
    void audit() const {
        std::size_t resident = 0;
        for (std::size_t i = 0; i < hosts_.size(); ++i) {
            const auto& host = hosts_[i];
            if (host.status == HostStatus::Sleeping && !host.vms.empty())
                throw std::logic_error("audit: sleeping host has resident VMs");
            resident += host.vms.size();
            for (VmId id : host.vms)
                if (vms_[static_cast<std::size_t>(id)].host != static_cast<HostId>(i))
                    throw std::logic_error("audit: VM/host residency mismatch");
        }
        if (resident != vms_.size())
            throw std::logic_error("audit: VM resident on zero or multiple hosts");
    }

    void finalize() {
        double joules = 0.0;
        for (const auto& h : result_.host_ledger) joules += h.energy_joules;
        result_.energy_kwh = joules / 3.6e6;
        result_.slatah = vmcsim::slatah(result_.host_ledger);
        result_.pdm = vmcsim::pdm(result_.vm_ledger);
        result_.sla_violation = slav(result_.slatah, result_.pdm);
        result_.esv = esv(result_.energy_kwh, result_.sla_violation);
        result_.sla_event_pct =
            active_host_steps_ == 0
                ? 0.0
                : static_cast<double>(saturated_host_steps_) / static_cast<double>(active_host_steps_);
    }

    SimulationConfig cfg_;
    int horizon_ = 0;
    std::size_t history_cap_ = 12;
    bool ran_ = false;
    std::vector<HostState> hosts_;
    std::vector<VmState> vms_;
    std::mt19937_64 rc_rng_{0};
    long active_host_steps_ = 0;
    long saturated_host_steps_ = 0;
    SimulationResult result_;
};

/// Convenience wrapper: build, run, return.
inline SimulationResult run_simulation(const SimulationConfig& cfg, const TraceSet& traces,
                                       std::span<const int> binding) {
    Simulation sim(cfg, traces, binding);
    return sim.run();
}

} // namespace vmcsim
