#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vmcsim/domain.hpp"
#include "vmcsim/rng.hpp"

namespace vmcsim {

/// VM-selection policy for draining an overloaded host.
struct SelectorConfig {
    enum class Kind { Mmt, Rc, Mc };

    Kind kind = Kind::Mmt;
    std::uint64_t rng_seed = 0;  // RC only
    int window_len = 12;         // MC history window

    static SelectorConfig make(Kind kind) {
        SelectorConfig cfg;
        cfg.kind = kind;
        return cfg;
    }

    void validate() const {
        if (window_len < 3) throw std::invalid_argument("selector: MC window_len must be >= 3");
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::Mmt: return "mmt";
            case Kind::Rc: return "rc";
            case Kind::Mc: return "mc";
        }
        return "?";
    }
};

inline SelectorConfig parse_selector(const std::string& token) {
    if (token == "mmt") return SelectorConfig::make(SelectorConfig::Kind::Mmt);
    if (token == "rc") return SelectorConfig::make(SelectorConfig::Kind::Rc);
    if (token == "mc") return SelectorConfig::make(SelectorConfig::Kind::Mc);
    throw std::invalid_argument("unknown selector \"" + token + "\"");
}

/// One migration candidate as the selector sees it.
struct VmCandidate {
    VmId id = 0;
    double ram_mb = 0.0;
    std::span<const double> history;  // demand fractions, most recent last
};

/// Minimum migration time: migration time is RAM over the shared migration
/// bandwidth, so this is argmin RAM, ties to the lowest id.
inline VmId select_mmt(std::span<const VmCandidate> candidates) {
    if (candidates.empty()) throw std::invalid_argument("select_mmt: no candidates");
    const VmCandidate* best = &candidates[0];
    for (const auto& c : candidates) {
        if (c.ram_mb < best->ram_mb || (c.ram_mb == best->ram_mb && c.id < best->id))
            best = &c;
    }
    return best->id;
}

/// Uniform random choice, deterministic in the caller-owned engine state.
inline VmId select_rc(std::span<const VmCandidate> candidates, std::mt19937_64& rng) {
    if (candidates.empty()) throw std::invalid_argument("select_rc: no candidates");
    return candidates[next_below(rng, candidates.size())].id;
}

/// Squared multiple correlation of `y` regressed (least squares with
/// intercept) on the columns of `predictors` over their common length.
/// Computed as the projection of y onto the span of the design columns
/// (modified Gram-Schmidt, redundant columns dropped), so exactly collinear
/// predictors still explain what their span explains. Constant y yields 0.
inline double squared_multiple_correlation(std::span<const double> y,
                                           std::span<const std::span<const double>> predictors) {
    const std::size_t n = y.size();

    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    double sst = 0.0;
    for (double v : y) sst += (v - mean_y) * (v - mean_y);
    if (sst < 1e-12) return 0.0;

    std::vector<std::vector<double>> basis;  // orthonormal columns
    auto add_column = [&](std::vector<double> col) {
        double norm0 = 0.0;
        for (double v : col) norm0 += v * v;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += q[i] * col[i];
                for (std::size_t i = 0; i < n; ++i) col[i] -= dot * q[i];
            }
        }
        double norm2 = 0.0;
        for (double v : col) norm2 += v * v;
        if (norm2 <= 1e-20 * std::max(1.0, norm0)) return;  // dependent, drop
        double inv = 1.0 / std::sqrt(norm2);
        for (double& v : col) v *= inv;
        basis.push_back(std::move(col));
    };

    add_column(std::vector<double>(n, 1.0));
    for (const auto& p : predictors) add_column(std::vector<double>(p.begin(), p.end()));

    std::vector<double> fitted(n, 0.0);
    for (const auto& q : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += q[i] * y[i];
        for (std::size_t i = 0; i < n; ++i) fitted[i] += dot * q[i];
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - fitted[i];
        sse += r * r;
    }
    return std::clamp(1.0 - sse / sst, 0.0, 1.0);
}

/// Maximum correlation: pick the VM whose demand history is best explained
/// by its co-residents' histories. Falls back to MMT when fewer than two
/// candidates carry a full window of history.
inline VmId select_mc(std::span<const VmCandidate> candidates, int window_len) {
    if (candidates.empty()) throw std::invalid_argument("select_mc: no candidates");
    if (candidates.size() < 2) return select_mmt(candidates);
    for (const auto& c : candidates)
        if (static_cast<int>(c.history.size()) < window_len) return select_mmt(candidates);

    auto window = [&](const VmCandidate& c) {
        return c.history.subspan(c.history.size() - static_cast<std::size_t>(window_len));
    };

    VmId best_id = candidates[0].id;
    double best_r2 = -1.0;
    std::vector<std::span<const double>> predictors;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        predictors.clear();
        for (std::size_t o = 0; o < candidates.size(); ++o)
            if (o != j) predictors.push_back(window(candidates[o]));
        double r2 = squared_multiple_correlation(window(candidates[j]), predictors);
        if (r2 > best_r2 || (r2 == best_r2 && candidates[j].id < best_id)) {
            best_r2 = r2;
            best_id = candidates[j].id;
        }
    }
    return best_id;
}

/// Dispatch on the configured policy. RC consumes from `rng`.
inline VmId select_vm(const SelectorConfig& cfg, std::span<const VmCandidate> candidates,
                      std::mt19937_64& rng) {
    switch (cfg.kind) {
        case SelectorConfig::Kind::Mmt: return select_mmt(candidates);
        case SelectorConfig::Kind::Rc: return select_rc(candidates, rng);
        case SelectorConfig::Kind::Mc: return select_mc(candidates, cfg.window_len);
    }
    throw std::logic_error("select_vm: bad selector kind");
}

} // namespace vmcsim
