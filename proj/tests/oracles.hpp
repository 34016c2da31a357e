// Independent reference implementations used to cross-check the library.
// These deliberately take different numerical routes (direct definition
// evaluation, Eigen dense least squares, exhaustive search) from the code
// under test.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "vmcsim/domain.hpp"
#include "vmcsim/placement.hpp"

namespace oracle {

inline double median_ref(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double mad_ref(const std::vector<double>& v) {
    double m = median_ref(v);
    std::vector<double> dev;
    dev.reserve(v.size());
    for (double x : v) dev.push_back(std::fabs(x - m));
    return median_ref(dev);
}

// Tukey hinges: median of each half of the sorted data, middle element
// excluded for odd lengths.
inline double iqr_ref(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t half = v.size() / 2;
    std::vector<double> lower(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<double> upper(v.end() - static_cast<std::ptrdiff_t>(half), v.end());
    return median_ref(upper) - median_ref(lower);
}

// Dense weighted least squares via Eigen QR on the sqrt(w)-scaled system.
inline double wls_line_at(const std::vector<double>& y, const std::vector<double>& w, double at) {
    const auto n = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
        X(i, 0) = sw;
        X(i, 1) = sw * static_cast<double>(i + 1);
        b(i) = sw * y[static_cast<std::size_t>(i)];
    }
    Eigen::Vector2d beta = X.colPivHouseholderQr().solve(b);
    return beta(0) + beta(1) * at;
}

inline std::vector<double> tricube_ref(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 1; i <= n; ++i) {
        double d = static_cast<double>(n - i) / static_cast<double>(n);
        w[i - 1] = std::pow(1.0 - std::pow(d, 3.0), 3.0);
    }
    return w;
}

inline double loess_ref(const std::vector<double>& y) {
    std::size_t n = y.size();
    return std::max(0.0, wls_line_at(y, tricube_ref(n), static_cast<double>(n + 1)));
}

inline double lrr_ref(const std::vector<double>& y) {
    std::size_t n = y.size();
    auto w = tricube_ref(n);
    auto fit_at = [&](const std::vector<double>& weights, double at) {
        return wls_line_at(y, weights, at);
    };
    std::vector<double> current = w;
    double initial_pred = fit_at(w, static_cast<double>(n + 1));
    double pred = initial_pred;
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> resid(n);
        for (std::size_t i = 0; i < n; ++i)
            resid[i] = std::fabs(y[i] - wls_line_at(y, current, static_cast<double>(i + 1)));
        double m = median_ref(resid);
        if (m == 0.0) return std::max(0.0, pred);
        std::vector<double> rw(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            double u = resid[i] / (6.0 * m);
            double b = u < 1.0 ? std::pow(1.0 - u * u, 2.0) : 0.0;
            rw[i] = w[i] * b;
            any = any || rw[i] > 0.0;
        }
        if (!any) return std::max(0.0, initial_pred);
        current = rw;
        pred = fit_at(current, static_cast<double>(n + 1));
    }
    return std::max(0.0, pred);
}

// R^2 of y on predictors (intercept included) via Eigen rank-revealing QR;
// the fitted values are the projection onto the design span.
inline double r2_ref(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& predictors) {
    const auto n = static_cast<Eigen::Index>(y.size());
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    if (sst < 1e-12) return 0.0;

    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(predictors.size() + 1));
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < predictors.size(); ++j)
            X(i, static_cast<Eigen::Index>(j + 1)) = predictors[j][static_cast<std::size_t>(i)];
        b(i) = y[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd beta = X.colPivHouseholderQr().solve(b);
    double sse = (b - X * beta).squaredNorm();
    return std::clamp(1.0 - sse / sst, 0.0, 1.0);
}

// Brute-force maximum-correlation pick over candidate windows.
struct McCandidate {
    int id;
    std::vector<double> window;
};

inline int mc_argmax_ref(const std::vector<McCandidate>& candidates) {
    int best_id = candidates.front().id;
    double best_r2 = -1.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        std::vector<std::vector<double>> preds;
        for (std::size_t o = 0; o < candidates.size(); ++o)
            if (o != j) preds.push_back(candidates[o].window);
        double r2 = r2_ref(candidates[j].window, preds);
        if (r2 > best_r2 || (r2 == best_r2 && candidates[j].id < best_id)) {
            best_r2 = r2;
            best_id = candidates[j].id;
        }
    }
    return best_id;
}

// Exhaustive feasible min-power-increase destination for a single VM, under
// the same pinned rules as placement (RAM hard, CPU headroom against
// requested MIPS, source excluded, lowest id on ties).
inline std::optional<vmcsim::HostId> best_destination_ref(
    const std::vector<vmcsim::PlannerHost>& hosts, const vmcsim::PlannerVm& vm,
    double headroom) {
    std::optional<vmcsim::HostId> best;
    double best_delta = 0.0;
    for (const auto& h : hosts) {
        if (h.status != vmcsim::HostStatus::Active) continue;
        if (h.id == vm.host) continue;
        if (h.ram_used_mb + vm.ram_mb > h.ram_mb) continue;
        if ((h.raw_demand_mips + vm.requested_mips) / h.mips > headroom) continue;
        double u0 = std::min(1.0, h.raw_demand_mips / h.mips);
        double u1 = std::min(1.0, (h.raw_demand_mips + vm.demand_mips) / h.mips);
        double p0 = h.power.kind == vmcsim::PowerModel::Kind::FullPowerAlways
                        ? h.power.max_watts
                        : h.power.idle_watts + (h.power.max_watts - h.power.idle_watts) * u0;
        double p1 = h.power.kind == vmcsim::PowerModel::Kind::FullPowerAlways
                        ? h.power.max_watts
                        : h.power.idle_watts + (h.power.max_watts - h.power.idle_watts) * u1;
        double delta = p1 - p0;
        if (!best || delta < best_delta) {
            best = h.id;
            best_delta = delta;
        }
    }
    return best;
}

// Independent best-fit-decreasing walk: sort by demand (desc, id ties), per
// VM exhaustively search the feasible min-delta destination, wake the
// lowest-id sleeping host that fits when nothing active does.
struct PabfdRefResult {
    std::vector<std::pair<vmcsim::VmId, vmcsim::HostId>> placed;
    std::vector<vmcsim::VmId> unplaced;
};

inline PabfdRefResult pabfd_ref(std::vector<vmcsim::PlannerHost> hosts,
                                std::vector<vmcsim::PlannerVm> vms,
                                std::vector<vmcsim::VmId> to_place, double headroom,
                                bool allow_wake) {
    std::sort(to_place.begin(), to_place.end(), [&](vmcsim::VmId a, vmcsim::VmId b) {
        double da = vms[static_cast<std::size_t>(a)].demand_mips;
        double db = vms[static_cast<std::size_t>(b)].demand_mips;
        return da != db ? da > db : a < b;
    });
    PabfdRefResult out;
    for (vmcsim::VmId id : to_place) {
        const auto& vm = vms[static_cast<std::size_t>(id)];
        auto dest = best_destination_ref(hosts, vm, headroom);
        if (!dest && allow_wake) {
            for (auto& h : hosts) {
                if (h.status != vmcsim::HostStatus::Sleeping || h.id == vm.host) continue;
                if (h.ram_used_mb + vm.ram_mb > h.ram_mb) continue;
                if ((h.raw_demand_mips + vm.requested_mips) / h.mips > headroom) continue;
                h.status = vmcsim::HostStatus::Active;
                dest = h.id;
                break;
            }
        }
        if (!dest) {
            out.unplaced.push_back(id);
            continue;
        }
        auto& h = hosts[static_cast<std::size_t>(*dest)];
        h.raw_demand_mips += vm.demand_mips;
        h.ram_used_mb += vm.ram_mb;
        out.placed.emplace_back(id, *dest);
    }
    return out;
}

} // namespace oracle
