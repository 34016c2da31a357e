// vmcsim command line: single simulations, batch experiments, and summary
// regeneration over a persisted result store.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vmcsim/config.hpp"
#include "vmcsim/engine.hpp"
#include "vmcsim/experiment.hpp"
#include "vmcsim/report.hpp"
#include "vmcsim/workload.hpp"

namespace {

struct SyntheticSpec {
    std::uint64_t seed = 1;
    int vms = 0;       // 0: use the configured VM count
    double mean = 0.3;
};

// "--synthetic seed=7,vms=100,mean=0.3"
SyntheticSpec parse_synthetic(const std::string& value) {
    SyntheticSpec spec;
    for (const auto& item : vmcsim::kv::split_list(value)) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw vmcsim::ConfigError("--synthetic: expected k=v, got \"" + item + "\"");
        std::string key = vmcsim::kv::trim(item.substr(0, eq));
        std::string val = vmcsim::kv::trim(item.substr(eq + 1));
        if (key == "seed") spec.seed = static_cast<std::uint64_t>(vmcsim::kv::to_long(key, val));
        else if (key == "vms") spec.vms = static_cast<int>(vmcsim::kv::to_long(key, val));
        else if (key == "mean") spec.mean = vmcsim::kv::to_double(key, val);
        else throw vmcsim::ConfigError("--synthetic: unknown key \"" + key + "\"");
    }
    return spec;
}

int cmd_simulate(const std::string& config_path, const std::string& traces_dir,
                 const std::string& synthetic, const std::string& mode,
                 const std::string& policy, const std::string& selector,
                 std::optional<std::uint64_t> seed, std::optional<int> horizon,
                 const std::string& out_dir) {
    vmcsim::SimulationConfig cfg;
    if (!config_path.empty()) cfg = vmcsim::load_sim_config(config_path);
    cfg.mode = vmcsim::parse_mode(mode);
    if (cfg.mode == vmcsim::SimMode::Consolidation) {
        cfg.detector = vmcsim::parse_detector(policy);
        cfg.selector = vmcsim::parse_selector(selector);
    }
    if (seed) cfg.dc.rng_seed = *seed;
    if (horizon) cfg.horizon_steps = *horizon;

    vmcsim::TraceSet traces;
    bool reuse = false;
    if (!traces_dir.empty() && !synthetic.empty())
        throw vmcsim::ConfigError("--traces and --synthetic are mutually exclusive");
    if (!traces_dir.empty()) {
        traces = vmcsim::load_trace_dir(traces_dir);
        reuse = true;  // archives may hold fewer traces than VMs
    } else if (!synthetic.empty()) {
        SyntheticSpec spec = parse_synthetic(synthetic);
        int n = spec.vms > 0 ? spec.vms : cfg.dc.n_vms;
        if (n < cfg.dc.n_vms) reuse = true;
        int samples = cfg.horizon_steps > 0 ? cfg.horizon_steps : 288;
        traces = vmcsim::generate_synthetic(spec.seed, n, samples, spec.mean);
    } else {
        throw vmcsim::ConfigError("one of --traces or --synthetic is required");
    }

    if (cfg.selector) cfg.selector->rng_seed = cfg.dc.rng_seed;
    auto binding = vmcsim::assign_traces(traces, cfg.dc.n_vms,
                                         vmcsim::mix_seed(cfg.dc.rng_seed, 2000), reuse);
    vmcsim::SimulationResult result = vmcsim::run_simulation(cfg, traces, binding);
    vmcsim::write_result_files(out_dir, cfg, traces.day_label, cfg.dc.rng_seed, result);

    std::printf("energy_kwh=%s migrations=%ld sla_violation=%s esv=%s -> %s\n",
                vmcsim::fmt6(result.energy_kwh).c_str(), result.migrations,
                vmcsim::fmt6(result.sla_violation).c_str(), vmcsim::fmt6(result.esv).c_str(),
                out_dir.c_str());
    return 0;
}

int cmd_experiment(const std::string& grid_path, const std::string& out_dir, int jobs) {
    vmcsim::ExperimentGrid grid = vmcsim::load_grid(grid_path);
    auto records = vmcsim::run_experiment(grid, jobs);
    auto manifest = vmcsim::to_json(grid);
    manifest["runs"] = records.size();
    manifest["combos"] = grid.combo_count();
    vmcsim::emit_summaries(records, manifest, out_dir);

    long failed = 0;
    for (const auto& r : records)
        if (!r.ok) ++failed;
    std::printf("%zu runs (%ld failed) -> %s\n", records.size(), failed, out_dir.c_str());
    return failed > 0 ? 2 : 0;
}

int cmd_summarize(const std::string& in_dir, const std::string& out_dir) {
    namespace fs = std::filesystem;
    auto records = vmcsim::parse_runs_csv(fs::path(in_dir) / "runs.csv");
    std::ifstream manifest_in(fs::path(in_dir) / "experiment.json");
    if (!manifest_in)
        throw vmcsim::ConfigError("cannot open " + (fs::path(in_dir) / "experiment.json").string());
    nlohmann::json manifest = nlohmann::json::parse(manifest_in);
    vmcsim::emit_summaries(records, manifest, out_dir);
    std::printf("summaries for %zu runs -> %s\n", records.size(), out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vmcsim: energy-aware VM consolidation simulator"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "run one simulation");
    std::string config_path, traces_dir, synthetic, out_dir;
    std::string mode = "consolidation", policy = "thr:0.9", selector = "mmt";
    std::optional<std::uint64_t> seed;
    std::optional<int> horizon;
    sim->add_option("--config", config_path, "data-center config file");
    sim->add_option("--traces", traces_dir, "directory of trace files");
    sim->add_option("--synthetic", synthetic, "synthetic workload: seed=N,vms=M,mean=U");
    sim->add_option("--mode", mode, "consolidation|dvfs|npa");
    sim->add_option("--policy", policy, "overload detector, e.g. thr:0.9, mad:2.5, lr:1.2");
    sim->add_option("--selector", selector, "VM selector: mmt|rc|mc");
    sim->add_option("--seed", seed, "override the config seed");
    sim->add_option("--horizon", horizon, "override the horizon (steps)");
    sim->add_option("--out", out_dir, "output directory")->required();

    auto* exp = app.add_subcommand("experiment", "run a policy grid over workload days");
    std::string grid_path, exp_out;
    int jobs = 1;
    exp->add_option("--grid", grid_path, "grid file")->required();
    exp->add_option("--out", exp_out, "output directory")->required();
    exp->add_option("--jobs", jobs, "parallel runs");

    auto* sum = app.add_subcommand("summarize", "regenerate summaries from a result store");
    std::string sum_in, sum_out;
    sum->add_option("--in", sum_in, "directory holding runs.csv and experiment.json")->required();
    sum->add_option("--out", sum_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, traces_dir, synthetic, mode, policy, selector, seed,
                                horizon, out_dir);
        if (exp->parsed()) return cmd_experiment(grid_path, exp_out, jobs);
        if (sum->parsed()) return cmd_summarize(sum_in, sum_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
