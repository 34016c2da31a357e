#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vmcsim {

/// Median with the usual convention: even-length input averages the two
/// central order statistics.
inline double median(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median absolute deviation: median(|v_i - median(v)|).
inline double mad(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mad: empty input");
    double m = median(values);
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - m);
    return median(dev);
}

/// Interquartile range under the Tukey-hinge convention: split the sorted
/// values at the median (dropping the middle element when the length is odd)
/// and take the median of each half.
inline double iqr(std::span<const double> values) {
    if (values.size() < 4) throw std::invalid_argument("iqr: need at least 4 values");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    std::size_t half = n / 2;
    std::span<const double> lower(v.data(), half);
    std::span<const double> upper(v.data() + (n - half), half);
    return median(upper) - median(lower);
}

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;

    double at(double x) const { return intercept + slope * x; }
};

/// Degree-1 weighted least squares over points (x_i, y_i).
inline LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> w) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s0 += w[i];
        s1 += w[i] * x[i];
        s2 += w[i] * x[i] * x[i];
        t0 += w[i] * y[i];
        t1 += w[i] * x[i] * y[i];
    }
    double det = s0 * s2 - s1 * s1;
    if (!(std::abs(det) > 1e-300) || s0 <= 0.0)
        throw std::domain_error("weighted_linear_fit: singular system");
    double slope = (s0 * t1 - s1 * t0) / det;
    double intercept = (t0 - slope * s1) / s0;
    return LinearFit{intercept, slope};
}

namespace detail {

// Tricube weights over index distance, most recent point (i = n) heaviest:
// w_i = (1 - ((n-i)/n)^3)^3 for i = 1..n.
inline std::vector<double> tricube_weights(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 1; i <= n; ++i) {
        double d = static_cast<double>(n - i) / static_cast<double>(n);
        double t = 1.0 - d * d * d;
        w[i - 1] = t * t * t;
    }
    return w;
}

inline std::vector<double> index_abscissas(std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
    return x;
}

} // namespace detail

/// Local-regression one-step-ahead forecast: tricube-weighted linear fit over
/// (i, u_i), i = 1..n, evaluated at i = n+1 and floored at 0.
inline double loess_predict(std::span<const double> history) {
    std::size_t n = history.size();
    if (n < 2) throw std::invalid_argument("loess_predict: need at least 2 samples");
    auto x = detail::index_abscissas(n);
    auto w = detail::tricube_weights(n);
    LinearFit fit = weighted_linear_fit(x, history, w);
    return std::max(0.0, fit.at(static_cast<double>(n + 1)));
}

/// Robust variant: after the initial tricube fit, downweight points by
/// bisquare robustness weights computed from the residuals and refit.
/// Two reweighting passes; a zero residual median short-circuits to the
/// current fit.
inline double robust_loess_predict(std::span<const double> history) {
    std::size_t n = history.size();
    if (n < 2) throw std::invalid_argument("robust_loess_predict: need at least 2 samples");
    auto x = detail::index_abscissas(n);
    auto w = detail::tricube_weights(n);
    LinearFit initial = weighted_linear_fit(x, history, w);
    LinearFit fit = initial;

    std::vector<double> resid(n), rw(n);
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) resid[i] = std::abs(history[i] - fit.at(x[i]));
        double m = median(resid);
        if (m == 0.0) break;
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            double u = resid[i] / (6.0 * m);
            double b = (u < 1.0) ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
            rw[i] = w[i] * b;
            any = any || rw[i] > 0.0;
        }
        if (!any) {
            fit = initial;
            break;
        }
        fit = weighted_linear_fit(x, history, rw);
    }
    return std::max(0.0, fit.at(static_cast<double>(n + 1)));
}

} // namespace vmcsim
