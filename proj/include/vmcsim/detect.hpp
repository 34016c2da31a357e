#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vmcsim/stats.hpp"

namespace vmcsim {

/// Host-overload detector. THR is a static threshold on the last
/// utilization sample; MAD/IQR derive a dynamic threshold from a robust
/// spread statistic; LR/LRR scale a local-regression forecast by a safety
/// parameter.
struct DetectorConfig {
    enum class Kind { Thr, Mad, Iqr, Lr, Lrr };

    Kind kind = Kind::Thr;
    double param = 0.9;  // THR threshold, or safety multiplier s
    int window_len = 1;  // history samples consumed by the statistical kinds

    static int default_window(Kind kind) {
        switch (kind) {
            case Kind::Thr: return 1;
            case Kind::Mad:
            case Kind::Iqr: return 12;
            case Kind::Lr:
            case Kind::Lrr: return 10;
        }
        return 1;
    }

    static DetectorConfig make(Kind kind, double param) {
        DetectorConfig cfg{kind, param, default_window(kind)};
        cfg.validate();
        return cfg;
    }

    void validate() const {
        switch (kind) {
            case Kind::Thr:
                if (!(param > 0.0 && param <= 1.0))
                    throw std::invalid_argument("detector thr: threshold must lie in (0,1]");
                break;
            case Kind::Mad:
            case Kind::Iqr:
                if (!(param > 0.0))
                    throw std::invalid_argument("detector mad/iqr: safety parameter must be > 0");
                break;
            case Kind::Lr:
            case Kind::Lrr:
                if (!(param >= 1.0))
                    throw std::invalid_argument("detector lr/lrr: safety parameter must be >= 1");
                break;
        }
        if (window_len < 1) throw std::invalid_argument("detector: window_len must be >= 1");
    }

    bool uses_history() const { return kind != Kind::Thr; }

    /// Placement admission headroom implied by the detector: the THR
    /// threshold when THR is active, full capacity otherwise.
    double admission_headroom() const { return kind == Kind::Thr ? param : 1.0; }

    std::string kind_name() const {
        switch (kind) {
            case Kind::Thr: return "thr";
            case Kind::Mad: return "mad";
            case Kind::Iqr: return "iqr";
            case Kind::Lr: return "lr";
            case Kind::Lrr: return "lrr";
        }
        return "?";
    }
};

/// Parse a policy token of the form "thr:0.9", "mad:2.5", "lr:1.2".
inline DetectorConfig parse_detector(const std::string& token) {
    auto colon = token.find(':');
    std::string name = token.substr(0, colon);
    DetectorConfig::Kind kind;
    if (name == "thr") kind = DetectorConfig::Kind::Thr;
    else if (name == "mad") kind = DetectorConfig::Kind::Mad;
    else if (name == "iqr") kind = DetectorConfig::Kind::Iqr;
    else if (name == "lr") kind = DetectorConfig::Kind::Lr;
    else if (name == "lrr") kind = DetectorConfig::Kind::Lrr;
    else throw std::invalid_argument("unknown detector \"" + token + "\"");
    if (colon == std::string::npos || colon + 1 == token.size())
        throw std::invalid_argument("detector \"" + token + "\" is missing its parameter");
    double param = 0.0;
    try {
        std::size_t used = 0;
        param = std::stod(token.substr(colon + 1), &used);
        if (used != token.size() - colon - 1) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
        throw std::invalid_argument("bad detector parameter in \"" + token + "\"");
    }
    return DetectorConfig::make(kind, param);
}

// Fallback while a host's history is shorter than the detector window.
inline constexpr double kWarmupThreshold = 0.9;

namespace detail {

inline std::span<const double> last_window(std::span<const double> history, int window_len) {
    std::size_t w = static_cast<std::size_t>(window_len);
    if (history.size() <= w) return history;
    return history.subspan(history.size() - w);
}

} // namespace detail

/// Dynamic threshold for the MAD/IQR kinds: 1 - s * stat over the last
/// window, floored at 0.
inline double dynamic_threshold(const DetectorConfig& cfg, std::span<const double> history) {
    auto window = detail::last_window(history, cfg.window_len);
    double stat = 0.0;
    switch (cfg.kind) {
        case DetectorConfig::Kind::Mad:
            if (static_cast<int>(history.size()) < cfg.window_len)
                throw std::invalid_argument("dynamic_threshold: history shorter than MAD window");
            stat = mad(window);
            break;
        case DetectorConfig::Kind::Iqr:
            stat = iqr(window);  // rejects < 4 samples itself
            break;
        default:
            throw std::logic_error("dynamic_threshold: detector has no dynamic threshold");
    }
    return std::clamp(1.0 - cfg.param * stat, 0.0, 1.0);
}

/// Per-step overload decision over a host's utilization history (most recent
/// sample last). Statistical kinds fall back to THR(0.9) until the history
/// fills their window.
inline bool is_overloaded(const DetectorConfig& cfg, std::span<const double> history) {
    if (history.empty()) throw std::invalid_argument("is_overloaded: empty history");
    double last = history.back();
    if (cfg.kind == DetectorConfig::Kind::Thr) return last > cfg.param;
    if (static_cast<int>(history.size()) < cfg.window_len) return last > kWarmupThreshold;
    switch (cfg.kind) {
        case DetectorConfig::Kind::Mad:
        case DetectorConfig::Kind::Iqr:
            return last > dynamic_threshold(cfg, history);
        case DetectorConfig::Kind::Lr: {
            double predicted = loess_predict(detail::last_window(history, cfg.window_len));
            return cfg.param * predicted >= 1.0;
        }
        case DetectorConfig::Kind::Lrr: {
            double predicted = robust_loess_predict(detail::last_window(history, cfg.window_len));
            return cfg.param * predicted >= 1.0;
        }
        default: return false;
    }
}

/// Pick the single underload candidate: the minimum-utilization host among
/// the eligible ones (Active, not overloaded, not already claimed this
/// step), ties to the lowest id. Returns -1 when none is eligible.
inline int underloaded_candidate(std::span<const double> utilization,
                                 std::span<const char> eligible) {
    int best = -1;
    for (std::size_t i = 0; i < utilization.size(); ++i) {
        if (!eligible[i]) continue;
        if (best < 0 || utilization[i] < utilization[static_cast<std::size_t>(best)])
            best = static_cast<int>(i);
    }
    return best;
}

} // namespace vmcsim
