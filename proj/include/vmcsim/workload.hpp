#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vmcsim/rng.hpp"

namespace vmcsim {

inline constexpr int kTraceIntervalSeconds = 300;

/// Per-VM CPU demand as a fraction of the VM's requested capacity, sampled
/// every 5 minutes. Samples always lie in [0,1].
struct UtilizationTrace {
    std::vector<double> samples;
    int interval_seconds = kTraceIntervalSeconds;
    std::string source_id;
};

struct TraceSet {
    std::vector<UtilizationTrace> traces;
    std::string day_label;

    std::size_t sample_count() const { return traces.empty() ? 0 : traces.front().samples.size(); }
};

struct TraceParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace detail

/// Parse one trace: one integer percentage (0-100) per line. Trailing blank
/// lines are tolerated; anything else non-numeric is an error with the line
/// number.
inline UtilizationTrace parse_trace(std::istream& in, const std::string& source_id) {
    UtilizationTrace trace;
    trace.source_id = source_id;
    std::string line;
    std::size_t line_no = 0;
    std::size_t pending_blanks = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank(line)) {
            ++pending_blanks;
            continue;
        }
        if (pending_blanks > 0)
            throw TraceParseError(source_id + ": blank line at line " +
                                  std::to_string(line_no - pending_blanks));
        std::size_t begin = line.find_first_not_of(" \t");
        std::size_t end = line.find_last_not_of(" \t\r");
        std::string token = line.substr(begin, end - begin + 1);
        long value = 0;
        std::size_t used = 0;
        try {
            value = std::stol(token, &used);
        } catch (const std::exception&) {
            throw TraceParseError(source_id + ": non-integer value at line " +
                                  std::to_string(line_no));
        }
        if (used != token.size())
            throw TraceParseError(source_id + ": non-integer value at line " +
                                  std::to_string(line_no));
        if (value < 0 || value > 100)
            throw TraceParseError(source_id + ": value outside [0,100] at line " +
                                  std::to_string(line_no));
        trace.samples.push_back(static_cast<double>(value) / 100.0);
    }
    if (trace.samples.empty())
        throw TraceParseError(source_id + ": empty trace file");
    return trace;
}

inline UtilizationTrace parse_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TraceParseError(path.string() + ": cannot open file");
    return parse_trace(in, path.filename().string());
}

/// Render a trace back to its file form (integer percent per line).
inline std::string render_trace(const UtilizationTrace& trace) {
    std::string out;
    for (double s : trace.samples) {
        out += std::to_string(static_cast<long>(std::lround(s * 100.0)));
        out += '\n';
    }
    return out;
}

/// Load every regular file in a directory as a trace, ordered by file name
/// so the result is independent of filesystem enumeration order. All traces
/// must agree on sample count.
inline TraceSet load_trace_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw TraceParseError(dir.string() + ": not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    if (files.empty()) throw TraceParseError(dir.string() + ": no trace files");

    TraceSet set;
    set.day_label = dir.filename().string();
    for (const auto& f : files) set.traces.push_back(parse_trace_file(f));
    std::size_t n = set.traces.front().samples.size();
    for (const auto& t : set.traces)
        if (t.samples.size() != n)
            throw TraceParseError(t.source_id + ": sample count " +
                                  std::to_string(t.samples.size()) + " differs from " +
                                  std::to_string(n));
    return set;
}

/// Deterministic synthetic workload: per trace, a mean-reverting random walk
/// clipped to [0,1] and quantized to integer percent (the trace file
/// resolution). Long-run mean tracks `mean_util`.
inline TraceSet generate_synthetic(std::uint64_t seed, int n_traces, int n_samples,
                                   double mean_util) {
    if (!(mean_util > 0.0 && mean_util <= 0.5))
        throw std::invalid_argument("generate_synthetic: mean_util must lie in (0, 0.5]");
    if (n_samples < 1) throw std::invalid_argument("generate_synthetic: n_samples must be >= 1");
    if (n_traces < 1) throw std::invalid_argument("generate_synthetic: n_traces must be >= 1");

    constexpr double kReversion = 0.2;
    constexpr double kNoise = 0.08;

    TraceSet set;
    set.day_label = "synthetic:" + std::to_string(seed);
    set.traces.reserve(static_cast<std::size_t>(n_traces));
    for (int i = 0; i < n_traces; ++i) {
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        UtilizationTrace trace;
        trace.source_id = set.day_label + "/" + std::to_string(i);
        trace.samples.reserve(static_cast<std::size_t>(n_samples));
        double u = mean_util;
        for (int t = 0; t < n_samples; ++t) {
            double quantized = std::lround(u * 100.0) / 100.0;
            trace.samples.push_back(std::clamp(quantized, 0.0, 1.0));
            u += kReversion * (mean_util - u) + kNoise * (2.0 * next_unit(rng) - 1.0);
            u = std::clamp(u, 0.0, 1.0);
        }
        set.traces.push_back(std::move(trace));
    }
    return set;
}

/// Bind VMs to traces: a seeded uniform draw without replacement (or with,
/// when `reuse` is set). Returns the trace index for each VM.
inline std::vector<int> assign_traces(const TraceSet& traces, int n_vms, std::uint64_t seed,
                                      bool reuse = false) {
    const int n_traces = static_cast<int>(traces.traces.size());
    if (n_vms < 0) throw std::invalid_argument("assign_traces: negative VM count");
    std::mt19937_64 rng(mix_seed(seed, 0xa551f2));
    std::vector<int> binding(static_cast<std::size_t>(n_vms));
    if (reuse) {
        for (auto& b : binding)
            b = static_cast<int>(next_below(rng, static_cast<std::uint64_t>(n_traces)));
        return binding;
    }
    if (n_traces < n_vms)
        throw std::invalid_argument("assign_traces: " + std::to_string(n_traces) +
                                    " traces for " + std::to_string(n_vms) +
                                    " VMs with reuse disabled");
    std::vector<int> perm(static_cast<std::size_t>(n_traces));
    for (int i = 0; i < n_traces; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n_traces - 1; i > 0; --i) {
        auto j = next_below(rng, static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
    }
    std::copy_n(perm.begin(), n_vms, binding.begin());
    return binding;
}

} // namespace vmcsim
