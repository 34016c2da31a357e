#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "vmcsim/config.hpp"
#include "vmcsim/engine.hpp"
#include "vmcsim/metrics.hpp"
#include "vmcsim/report.hpp"
#include "vmcsim/workload.hpp"

namespace vmcsim {

/// One workload day: a directory of trace files or a synthetic seed.
struct DaySpec {
    std::string label;
    bool synthetic = true;
    std::uint64_t seed = 0;
    std::filesystem::path dir;

    static DaySpec parse(const std::string& token) {
        DaySpec day;
        if (token.rfind("synthetic:", 0) == 0) {
            day.synthetic = true;
            day.seed = static_cast<std::uint64_t>(kv::to_long("days", token.substr(10)));
            day.label = token;
        } else {
            day.synthetic = false;
            day.dir = token;
            day.label = day.dir.filename().string();
        }
        return day;
    }
};

/// A policy/parameter grid over workload days, with the shared data-center
/// and engine settings.
struct ExperimentGrid {
    std::vector<std::pair<DetectorConfig::Kind, std::vector<double>>> detectors;
    std::vector<SelectorConfig::Kind> selectors;
    std::vector<DaySpec> days;
    bool include_npa = false;
    bool include_dvfs = false;
    double synthetic_mean = 0.3;
    SimulationConfig base;  // dc + engine settings; detector/selector filled per run

    std::size_t combo_count() const {
        std::size_t params = 0;
        for (const auto& [kind, values] : detectors) params += values.size();
        return params * selectors.size();
    }
};

/// The documented default grid: 27 detector-parameter entries x 3 selectors
/// (81 combos) over ten synthetic days, with both baselines.
inline ExperimentGrid default_grid() {
    ExperimentGrid grid;
    grid.detectors = {
        {DetectorConfig::Kind::Thr, {0.6, 0.7, 0.8, 0.9, 1.0}},
        {DetectorConfig::Kind::Mad, {1.5, 2.0, 2.5, 3.0, 3.5}},
        {DetectorConfig::Kind::Iqr, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}},
        {DetectorConfig::Kind::Lr, {1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6}},
        {DetectorConfig::Kind::Lrr, {1.0, 1.1, 1.2, 1.3}},
    };
    grid.selectors = {SelectorConfig::Kind::Mmt, SelectorConfig::Kind::Rc,
                      SelectorConfig::Kind::Mc};
    for (int d = 1; d <= 10; ++d) grid.days.push_back(DaySpec::parse("synthetic:" + std::to_string(d)));
    grid.include_npa = true;
    grid.include_dvfs = true;
    grid.base.horizon_steps = 288;
    return grid;
}

struct RunKey {
    std::string combo;
    std::string day;
    std::uint64_t seed = 0;

    bool operator<(const RunKey& o) const {
        return std::tie(combo, day, seed) < std::tie(o.combo, o.day, o.seed);
    }
};

struct PlannedRun {
    RunKey key;
    SimulationConfig cfg;
    std::size_t day_index = 0;
};

struct RunRecord {
    RunKey key;
    std::string config_hash;
    bool ok = false;
    std::string error;
    MetricsReport metrics;
    long unplaced = 0;
    double wall_seconds = 0.0;
};

inline std::string combo_label(const DetectorConfig& det, const SelectorConfig& sel) {
    return det.kind_name() + "-" + sel.kind_name() + "-" + param_label(det.param);
}

/// Expand the grid into the full run list: detector kinds in canonical
/// order, parameters ascending, selectors in canonical order, days in listed
/// order; NPA then DVFS baselines appended per day.
inline std::vector<PlannedRun> expand_grid(const ExperimentGrid& grid) {
    if (grid.days.empty()) throw ConfigError("experiment grid has no workload days");
    std::vector<PlannedRun> runs;

    auto detectors = grid.detectors;
    std::sort(detectors.begin(), detectors.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    auto day_seed = [&](std::size_t day_index) {
        return mix_seed(grid.base.dc.rng_seed, 1000 + day_index);
    };

    for (auto& [kind, params] : detectors) {
        auto sorted_params = params;
        std::sort(sorted_params.begin(), sorted_params.end());
        for (double param : sorted_params) {
            DetectorConfig det = DetectorConfig::make(kind, param);
            for (auto sel_kind : grid.selectors) {
                SelectorConfig sel = SelectorConfig::make(sel_kind);
                std::string combo = combo_label(det, sel);
                for (std::size_t d = 0; d < grid.days.size(); ++d) {
                    PlannedRun run;
                    run.key = RunKey{combo, grid.days[d].label, day_seed(d)};
                    run.cfg = grid.base;
                    run.cfg.mode = SimMode::Consolidation;
                    run.cfg.detector = det;
                    sel.rng_seed = mix_seed(run.key.seed, fnv1a(combo));
                    run.cfg.selector = sel;
                    run.day_index = d;
                    runs.push_back(std::move(run));
                }
            }
        }
    }
    std::vector<SimMode> baselines;
    if (grid.include_npa) baselines.push_back(SimMode::Npa);
    if (grid.include_dvfs) baselines.push_back(SimMode::Dvfs);
    for (SimMode mode : baselines) {
        for (std::size_t d = 0; d < grid.days.size(); ++d) {
            PlannedRun run;
            run.key = RunKey{mode_name(mode), grid.days[d].label, day_seed(d)};
            run.cfg = grid.base;
            run.cfg.mode = mode;
            run.cfg.detector.reset();
            run.cfg.selector.reset();
            run.day_index = d;
            runs.push_back(std::move(run));
        }
    }
    if (runs.empty()) throw ConfigError("experiment grid expands to nothing to run");
    return runs;
}

namespace detail {

struct DayTraces {
    TraceSet traces;
    std::vector<int> binding;
    std::string error;  // non-empty: the whole day failed to load
};

inline std::vector<DayTraces> load_days(const ExperimentGrid& grid) {
    std::vector<DayTraces> days(grid.days.size());
    for (std::size_t d = 0; d < grid.days.size(); ++d) {
        auto& slot = days[d];
        try {
            const auto& day = grid.days[d];
            slot.traces = day.synthetic
                              ? generate_synthetic(day.seed, grid.base.dc.n_vms,
                                                   grid.base.horizon_steps > 0
                                                       ? grid.base.horizon_steps
                                                       : 288,
                                                   grid.synthetic_mean)
                              : load_trace_dir(day.dir);
            slot.binding = assign_traces(slot.traces, grid.base.dc.n_vms,
                                         mix_seed(grid.base.dc.rng_seed, 2000 + d),
                                         /*reuse=*/!day.synthetic);
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    }
    return days;
}

} // namespace detail

/// Execute every planned run, `jobs` at a time. Output order is fixed by
/// RunKey regardless of scheduling; a failed run becomes an error record.
inline std::vector<RunRecord> run_experiment(const ExperimentGrid& grid, int jobs = 1) {
    std::vector<PlannedRun> runs = expand_grid(grid);
    std::vector<detail::DayTraces> days = detail::load_days(grid);
    std::vector<RunRecord> records(runs.size());

    auto execute = [&](std::size_t i) {
        const PlannedRun& run = runs[i];
        RunRecord rec;
        rec.key = run.key;
        rec.config_hash = config_hash(run.cfg, run.key.day, run.key.seed);
        const auto& day = days[run.day_index];
        auto start = std::chrono::steady_clock::now();
        try {
            if (!day.error.empty()) throw std::runtime_error(day.error);
            SimulationResult result = run_simulation(run.cfg, day.traces, day.binding);
            rec.metrics = result.metrics();
            rec.unplaced = result.unplaced_total;
            rec.ok = true;
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        rec.wall_seconds = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - start).count();
        records[i] = std::move(rec);
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < runs.size(); ++i) execute(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        int n = std::min<int>(jobs, static_cast<int>(runs.size()));
        workers.reserve(static_cast<std::size_t>(n));
        for (int w = 0; w < n; ++w)
            workers.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= runs.size()) return;
                    execute(i);
                }
            });
        for (auto& t : workers) t.join();
    }

    std::sort(records.begin(), records.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.key < b.key; });
    return records;
}

inline nlohmann::json to_json(const ExperimentGrid& grid) {
    nlohmann::json det = nlohmann::json::array();
    for (const auto& [kind, params] : grid.detectors)
        det.push_back({{"kind", DetectorConfig{kind, 1.0, 1}.kind_name()}, {"params", params}});
    nlohmann::json sel = nlohmann::json::array();
    for (auto k : grid.selectors) sel.push_back(SelectorConfig::make(k).kind_name());
    nlohmann::json days = nlohmann::json::array();
    for (const auto& d : grid.days) days.push_back(d.synthetic ? d.label : d.dir.string());
    return nlohmann::json{{"detectors", det},
                          {"selectors", sel},
                          {"days", days},
                          {"include_npa", grid.include_npa},
                          {"include_dvfs", grid.include_dvfs},
                          {"synthetic_mean", grid.synthetic_mean},
                          {"base", to_json(grid.base)}};
}

namespace detail {

inline std::string sanitize_csv(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

} // namespace detail

inline std::string runs_csv(const std::vector<RunRecord>& records) {
    std::string out = "combo,day,seed,config_hash,status,energy_kwh,slatah,pdm,sla_violation,"
                      "esv,migrations,unplaced,error\n";
    for (const auto& r : records) {
        out += r.key.combo + ',' + r.key.day + ',' + std::to_string(r.key.seed) + ',' +
               r.config_hash + ',' + (r.ok ? "ok" : "error") + ',';
        if (r.ok) {
            out += fmt6(r.metrics.energy_kwh) + ',' + fmt6(r.metrics.slatah) + ',' +
                   fmt6(r.metrics.pdm) + ',' + fmt6(r.metrics.sla_violation) + ',' +
                   fmt6(r.metrics.esv) + ',' + std::to_string(r.metrics.migrations) + ',' +
                   std::to_string(r.unplaced) + ',';
        } else {
            out += ",,,,,,,";
        }
        out += detail::sanitize_csv(r.error) + '\n';
    }
    return out;
}

/// Parse a runs.csv produced by runs_csv(); used by the summarize command.
inline std::vector<RunRecord> parse_runs_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + " is empty");
    std::vector<RunRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        while (f.size() < 13) f.emplace_back();
        RunRecord rec;
        rec.key = RunKey{f[0], f[1], static_cast<std::uint64_t>(kv::to_long("seed", f[2]))};
        rec.config_hash = f[3];
        rec.ok = f[4] == "ok";
        if (rec.ok) {
            rec.metrics.energy_kwh = kv::to_double("energy_kwh", f[5]);
            rec.metrics.slatah = kv::to_double("slatah", f[6]);
            rec.metrics.pdm = kv::to_double("pdm", f[7]);
            rec.metrics.sla_violation = kv::to_double("sla_violation", f[8]);
            rec.metrics.esv = kv::to_double("esv", f[9]);
            rec.metrics.migrations = kv::to_long("migrations", f[10]);
            rec.unplaced = kv::to_long("unplaced", f[11]);
        } else {
            rec.error = f[12];
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// Write the result store and the four figure-ready median CSVs.
/// Deterministic bytes for a given record list.
inline void emit_summaries(const std::vector<RunRecord>& records, const nlohmann::json& manifest,
                           const std::filesystem::path& out_dir) {
    if (records.empty()) throw ConfigError("nothing to summarize");
    std::filesystem::create_directories(out_dir);

    write_file(out_dir / "runs.csv", runs_csv(records));
    write_file(out_dir / "experiment.json", manifest.dump(2) + "\n");

    std::vector<std::pair<std::string, MetricsReport>> ok_runs;
    for (const auto& r : records)
        if (r.ok) ok_runs.emplace_back(r.key.combo, r.metrics);
    auto medians = aggregate_median(ok_runs);
    std::map<std::string, int> seen;
    for (const auto& r : records) seen[r.key.combo] = 1;
    for (const auto& [combo, _] : seen)
        if (!medians.count(combo))
            std::fprintf(stderr, "warning: combo %s has no successful runs, excluded from medians\n",
                         combo.c_str());

    auto emit = [&](const std::string& file, auto field) {
        std::string out = "combo_label,median_value\n";
        for (const auto& [label, m] : medians) out += label + ',' + fmt6(field(m)) + '\n';
        write_file(out_dir / file, out);
    };
    emit("energy_median.csv", [](const MedianReport& m) { return m.energy_kwh; });
    emit("slav_median.csv", [](const MedianReport& m) { return m.sla_violation; });
    emit("migrations_median.csv", [](const MedianReport& m) { return m.migrations; });
    emit("esv_median.csv", [](const MedianReport& m) { return m.esv; });
}

/// Grid-file loader: the simulate-config keys plus the grid keys
/// (thr/mad/iqr/lr/lrr parameter lists, selectors, days, baselines,
/// synthetic_mean).
inline ExperimentGrid load_grid(const std::filesystem::path& path) {
    ExperimentGrid grid;
    grid.base.horizon_steps = 288;
    bool any_selector = false;
    for (const auto& [key, value] : kv::parse_file(path)) {
        if (apply_sim_key(grid.base, key, value)) continue;
        if (key == "thr" || key == "mad" || key == "iqr" || key == "lr" || key == "lrr") {
            DetectorConfig probe = parse_detector(key + ":" + kv::split_list(value).front());
            grid.detectors.emplace_back(probe.kind, kv::to_doubles(key, value));
        } else if (key == "selectors") {
            for (const auto& s : kv::split_list(value))
                grid.selectors.push_back(parse_selector(s).kind);
            any_selector = true;
        } else if (key == "days") {
            for (const auto& d : kv::split_list(value)) grid.days.push_back(DaySpec::parse(d));
        } else if (key == "baselines") {
            for (const auto& b : kv::split_list(value)) {
                SimMode mode = parse_mode(b);
                if (mode == SimMode::Npa) grid.include_npa = true;
                else if (mode == SimMode::Dvfs) grid.include_dvfs = true;
                else throw ConfigError("baselines: \"" + b + "\" is not a baseline mode");
            }
        } else if (key == "synthetic_mean") {
            grid.synthetic_mean = kv::to_double(key, value);
        } else {
            throw ConfigError(path.string() + ": unknown key \"" + key + "\"");
        }
    }
    if (grid.detectors.empty() && !grid.include_npa && !grid.include_dvfs)
        throw ConfigError(path.string() + ": grid defines no detectors and no baselines");
    if (!grid.detectors.empty() && !any_selector)
        throw ConfigError(path.string() + ": grid defines detectors but no selectors");
    // Validate every policy parameter up front.
    for (const auto& [kind, params] : grid.detectors)
        for (double p : params) DetectorConfig::make(kind, p);
    return grid;
}

} // namespace vmcsim
