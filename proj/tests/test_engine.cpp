#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "vmcsim/engine.hpp"
#include "vmcsim/report.hpp"
#include "vmcsim/rng.hpp"
#include "vmcsim/workload.hpp"

using namespace vmcsim;

namespace {

TraceSet constant_traces(int n, int samples, int percent) {
    TraceSet set;
    set.day_label = "const";
    for (int i = 0; i < n; ++i) {
        UtilizationTrace t;
        t.source_id = "const/" + std::to_string(i);
        t.samples.assign(static_cast<std::size_t>(samples),
                         static_cast<double>(percent) / 100.0);
        set.traces.push_back(std::move(t));
    }
    return set;
}

std::vector<int> identity_binding(int n) {
    std::vector<int> b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = i;
    return b;
}

SimulationConfig small_consolidation(int hosts, int vms, std::uint64_t seed = 1) {
    SimulationConfig cfg;
    cfg.dc.n_hosts = hosts;
    cfg.dc.n_vms = vms;
    cfg.dc.rng_seed = seed;
    cfg.mode = SimMode::Consolidation;
    cfg.detector = DetectorConfig::make(DetectorConfig::Kind::Thr, 0.9);
    cfg.selector = SelectorConfig::make(SelectorConfig::Kind::Mmt);
    return cfg;
}

} // namespace

TEST_CASE("npa energy is the closed-form maximum draw") {
    SimulationConfig cfg;
    cfg.dc.n_hosts = 10;
    cfg.dc.n_vms = 10;
    cfg.mode = SimMode::Npa;
    auto traces = constant_traces(10, 288, 30);
    auto result = run_simulation(cfg, traces, identity_binding(10));
    // 10 hosts * 250 W * 24 h = 60 kWh.
    CHECK(std::fabs(result.energy_kwh - 60.0) <= 60.0 * 1e-9);
    CHECK(result.migrations == 0);
    CHECK(result.sla_violation == 0.0);
    CHECK(result.esv == 0.0);
    CHECK(result.pdm == 0.0);
}

TEST_CASE("dvfs energy follows the linear model") {
    SimulationConfig cfg;
    cfg.dc.n_hosts = 1;
    cfg.dc.n_vms = 1;
    cfg.dc.host_mips_options = {1000.0};
    cfg.dc.vm_mips_options = {1000.0};
    cfg.mode = SimMode::Dvfs;
    auto traces = constant_traces(1, 288, 50);
    auto result = run_simulation(cfg, traces, identity_binding(1));
    // 212.5 W * 24 h = 5.1 kWh.
    CHECK(std::fabs(result.energy_kwh - 5.1) <= 5.1 * 1e-9);
    CHECK(result.migrations == 0);
    CHECK(result.sla_violation == 0.0);
}

TEST_CASE("baselines never migrate nor degrade") {
    std::mt19937_64 seeds(5);
    for (auto mode : {SimMode::Npa, SimMode::Dvfs}) {
        auto traces = generate_synthetic(seeds(), 20, 48, 0.4);
        SimulationConfig cfg;
        cfg.dc.n_hosts = 8;
        cfg.dc.n_vms = 20;
        cfg.mode = mode;
        auto binding = assign_traces(traces, 20, 3);
        auto result = run_simulation(cfg, traces, binding);
        CHECK(result.migrations == 0);
        CHECK(result.pdm == 0.0);
        CHECK(result.sla_violation == 0.0);
        CHECK(result.esv == 0.0);
        CHECK(result.unplaced_total == 0);
        for (const auto& s : result.steps) CHECK(s.active_hosts == 8);
    }
}

TEST_CASE("consolidation runs are deterministic") {
    auto traces = generate_synthetic(17, 30, 48, 0.35);
    auto binding = assign_traces(traces, 30, 2);
    auto cfg = small_consolidation(10, 30, 4);
    cfg.detector = DetectorConfig::make(DetectorConfig::Kind::Lr, 1.2);
    cfg.selector = SelectorConfig::make(SelectorConfig::Kind::Rc);

    auto a = run_simulation(cfg, traces, binding);
    auto b = run_simulation(cfg, traces, binding);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(steps_csv(a) == steps_csv(b));
}

TEST_CASE("migration duration follows the bandwidth model") {
    SimulationConfig cfg;
    CHECK(std::fabs(cfg.migration_duration_seconds(1024.0) - 17.179869184) <= 1e-9);
    cfg.migration_bandwidth_share = 1.0;
    CHECK(std::fabs(cfg.migration_duration_seconds(1024.0) - 8.589934592) <= 1e-9);
}

TEST_CASE("a single host stays quiescent") {
    auto traces = constant_traces(2, 24, 20);
    auto cfg = small_consolidation(1, 2);
    cfg.dc.host_mips_options = {3000.0};
    auto result = run_simulation(cfg, traces, identity_binding(2));
    CHECK(result.migrations == 0);
    for (const auto& s : result.steps) {
        CHECK(s.migrations_started == 0);
        CHECK(s.active_hosts == 1);
    }
}

TEST_CASE("an overloaded host triggers at least one migration") {
    // Two hosts; all VMs start on one of them and a hot trace overloads it.
    SimulationConfig cfg = small_consolidation(2, 2);
    cfg.dc.host_mips_options = {1000.0};
    cfg.dc.vm_mips_options = {500.0};
    auto traces = constant_traces(2, 24, 100);
    auto result = run_simulation(cfg, traces, identity_binding(2));
    CHECK(result.migrations >= 1);
}

TEST_CASE("sleeping hosts accrue the configured standby power") {
    SimulationConfig cfg = small_consolidation(2, 1);
    cfg.dc.host_mips_options = {1000.0};
    cfg.dc.vm_mips_options = {500.0};
    cfg.dc.sleep_watts = 10.4;
    auto traces = constant_traces(1, 288, 0);
    auto result = run_simulation(cfg, traces, identity_binding(1));

    // The idle VM's host is emptied at step 0; the donor sleeps all day at
    // 10.4 W while the survivor idles at 175 W.
    long sleepers = 0;
    for (const auto& h : result.host_ledger) {
        if (h.active_seconds == 0.0) {
            ++sleepers;
            CHECK(std::fabs(h.energy_joules / 3.6e6 - 0.2496) <= 0.2496 * 1e-9);
        }
    }
    CHECK(sleepers == 1);
    double expected = (175.0 + 10.4) * 86400.0 / 3.6e6;
    CHECK(std::fabs(result.energy_kwh - expected) <= expected * 1e-9);
}

TEST_CASE("with idle workloads consolidation beats dvfs beats npa") {
    auto traces = constant_traces(12, 48, 0);
    std::vector<double> energies;
    for (auto mode : {SimMode::Consolidation, SimMode::Dvfs, SimMode::Npa}) {
        SimulationConfig cfg = small_consolidation(6, 12);
        cfg.mode = mode;
        if (mode != SimMode::Consolidation) {
            cfg.detector.reset();
            cfg.selector.reset();
        }
        energies.push_back(run_simulation(cfg, traces, identity_binding(12)).energy_kwh);
    }
    CHECK(energies[0] < energies[1]);
    CHECK(energies[1] < energies[2]);
}

TEST_CASE("energy equals the independently recomputed ledger sums") {
    auto traces = generate_synthetic(23, 40, 48, 0.4);
    auto binding = assign_traces(traces, 40, 6);
    auto cfg = small_consolidation(12, 40, 9);
    auto result = run_simulation(cfg, traces, binding);

    double from_hosts = 0.0;
    for (const auto& h : result.host_ledger) from_hosts += h.energy_joules;
    double from_steps = 0.0;
    for (const auto& s : result.steps) from_steps += s.total_power_w * 300.0;
    CHECK(std::fabs(result.energy_kwh - from_hosts / 3.6e6) <=
          std::fabs(result.energy_kwh) * 1e-9);
    CHECK(std::fabs(result.energy_kwh - from_steps / 3.6e6) <=
          std::fabs(result.energy_kwh) * 1e-9);
}

TEST_CASE("served capacity never exceeds active capacity") {
    auto traces = generate_synthetic(31, 30, 48, 0.45);
    auto binding = assign_traces(traces, 30, 8);
    auto cfg = small_consolidation(8, 30, 10);
    auto result = run_simulation(cfg, traces, binding);
    for (const auto& s : result.steps) CHECK(s.served_mips <= s.active_mips + 1e-9);
}

TEST_CASE("migration accounting feeds pdm and slav as exact products") {
    SimulationConfig cfg = small_consolidation(2, 2);
    cfg.dc.host_mips_options = {1000.0};
    cfg.dc.vm_mips_options = {500.0};
    auto traces = constant_traces(2, 24, 100);
    auto result = run_simulation(cfg, traces, identity_binding(2));
    REQUIRE(result.migrations >= 1);
    CHECK(result.pdm > 0.0);
    CHECK(result.pdm <= cfg.migration_degradation);
    CHECK(result.sla_violation == result.slatah * result.pdm);
    CHECK(result.esv == result.energy_kwh * result.sla_violation);
    CHECK(static_cast<long>(result.migration_log.size()) == result.migrations);
}

TEST_CASE("short traces are rejected before stepping") {
    auto traces = constant_traces(2, 10, 30);
    SimulationConfig cfg = small_consolidation(2, 2);
    cfg.horizon_steps = 50;
    CHECK_THROWS_WITH(Simulation(cfg, traces, identity_binding(2)),
                      Catch::Matchers::ContainsSubstring("shorter"));
}

TEST_CASE("binding must cover every vm") {
    auto traces = constant_traces(2, 10, 30);
    SimulationConfig cfg = small_consolidation(2, 2);
    CHECK_THROWS_AS(Simulation(cfg, traces, std::vector<int>{0}), std::invalid_argument);
}

TEST_CASE("consolidation requires both policies") {
    auto traces = constant_traces(2, 10, 30);
    SimulationConfig cfg;
    cfg.dc.n_hosts = 2;
    cfg.dc.n_vms = 2;
    cfg.mode = SimMode::Consolidation;
    CHECK_THROWS_AS(Simulation(cfg, traces, identity_binding(2)), std::invalid_argument);
}

TEST_CASE("an inadmissible initial vm set is a configuration error") {
    SimulationConfig cfg = small_consolidation(1, 40);
    cfg.dc.host_mips_options = {1000.0};
    cfg.dc.vm_mips_options = {1000.0};
    auto traces = constant_traces(40, 10, 10);
    CHECK_THROWS_WITH(Simulation(cfg, traces, identity_binding(40)),
                      Catch::Matchers::ContainsSubstring("admit"));
}
